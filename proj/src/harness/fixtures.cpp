#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <map>

namespace axiflow {

namespace {

const std::map<std::string, std::string>& table() {
    static const std::map<std::string, std::string> t = {
        {"sphere_mcf", R"(
name = sphere_mcf
geometry.type = semicircle
geometry.J = 32
time.T = 0.125
time.dt_factor = 0.1
exact = sphere_mcf
convergence.J = [32, 64, 128, 256, 512]
)"},
        {"sphere_power", R"(
name = sphere_power
geometry.type = semicircle
geometry.J = 32
scheme.speed = power
scheme.beta = 0.5
time.T = 0.23570226039551584
time.dt_factor = 0.1
exact = sphere_power
convergence.J = [32, 64, 128, 256, 512]
)"},
        {"sphere_inverse", R"(
name = sphere_inverse
geometry.type = semicircle
geometry.J = 32
scheme.speed = inverse
time.T = 1
time.dt_factor = 0.1
exact = sphere_inverse
convergence.J = [32, 64, 128, 256, 512]
)"},
        {"sphere_c_linear", R"(
name = sphere_c_linear
geometry.type = semicircle
geometry.J = 32
scheme.name = C
time.T = 0.125
time.dt_factor = 0.1
exact = sphere_mcf
)"},
        {"torus_shrink", R"(
name = torus_shrink
geometry.type = circle
geometry.J = 256
geometry.R = 1
geometry.r = 0.5
time.T = 0.13
time.dt = 1e-4
)"},
        {"torus_close", R"(
name = torus_close
geometry.type = circle
geometry.J = 256
geometry.R = 1
geometry.r = 0.7
time.T = 0.2
time.dt = 1e-4
stop.min_r = 0.05
)"},
        {"cylinder_pinch", R"(
name = cylinder_pinch
geometry.type = cylinder
geometry.J = 128
geometry.radius = 1
geometry.z0 = -2
geometry.z1 = 2
geometry.bottom = fixed
geometry.top = fixed
time.T = 1
time.dt = 1e-4
stop.min_r = 0.05
)"},
        {"grim_reaper", R"(
name = grim_reaper
geometry.type = cylinder
geometry.J = 128
geometry.radius = 1
geometry.z0 = 0
geometry.z1 = 1
geometry.bottom = "plane:-0.5"
geometry.top = "plane:-0.5"
time.T = 100
time.dt = 1e-3
output.snapshot_every = 10000
)"},
        {"disc_in_cylinder", R"(
name = disc_in_cylinder
geometry.type = disc
geometry.J = 128
geometry.radius = 1
geometry.z0 = 0
geometry.top = "cylinder:-0.5"
time.T = 2
time.dt = 1e-3
)"},
        {"imcf_torus", R"(
name = imcf_torus
geometry.type = circle
geometry.J = 256
geometry.R = 1
geometry.r = 0.25
scheme.speed = inverse
time.T = 0.7
time.dt = 1e-4
)"},
        {"conserved_sphere_A", R"(
name = conserved_sphere_A
geometry.type = semicircle
geometry.J = 64
scheme.conserved = true
time.T = 1
time.dt = 1e-4
)"},
        {"conserved_sphere_Cstar_lumped", R"(
name = conserved_sphere_Cstar_lumped
geometry.type = semicircle
geometry.J = 64
scheme.name = C_star
scheme.conserved = true
time.T = 1
time.dt = 1e-4
)"},
        {"conserved_sphere_Cstar_exact", R"(
name = conserved_sphere_Cstar_exact
geometry.type = semicircle
geometry.J = 64
scheme.name = C_star
scheme.integration = exact
scheme.conserved = true
time.T = 1
time.dt = 1e-4
)"},
        {"conserved_torus", R"(
name = conserved_torus
geometry.type = circle
geometry.J = 256
geometry.R = 1
geometry.r = 0.5
scheme.conserved = true
time.T = 0.2
time.dt = 1e-4
stop.min_r = 0.05
)"},
        {"conserved_cigar", R"(
name = conserved_cigar
geometry.type = superellipse
geometry.J = 128
geometry.a = 0.25
geometry.b = 1
scheme.conserved = true
time.T = 1
time.dt = 1e-4
)"},
        {"conserved_disc", R"(
name = conserved_disc
geometry.type = superellipse
geometry.J = 128
geometry.a = 1
geometry.b = 0.25
scheme.conserved = true
time.T = 4
time.dt = 1e-4
)"},
        {"conserved_spiral", R"(
name = conserved_spiral
geometry.type = spiral
geometry.J = 1024
geometry.turns = 2
scheme.conserved = true
time.T = 0.01
time.dt = 1e-6
)"},
        {"torus_scheme_B", R"(
name = torus_scheme_B
geometry.type = circle
geometry.J = 256
geometry.R = 1
geometry.r = 0.5
scheme.name = B
time.T = 0.13
time.dt = 1e-4
)"},
        {"singular_segment", R"(
name = singular_segment
geometry.type = cylinder
geometry.J = 16
geometry.radius = 1
geometry.z0 = 0
geometry.z1 = 1
geometry.bottom = "cylinder:0"
geometry.top = "cylinder:0"
time.T = 0.01
time.dt = 1e-3
)"},
        {"newton_starved", R"(
name = newton_starved
geometry.type = semicircle
geometry.J = 32
scheme.name = C_star
newton.max_iterations = 1
time.T = 0.01
time.dt = 1e-3
)"},
        {"gauss_sphere", R"(
name = gauss_sphere
geometry.type = semicircle
geometry.J = 64
scheme.speed = gauss
time.T = 0.1
time.dt = 1e-4
)"},
    };
    return t;
}

} // namespace

ExperimentConfig fixture(const std::string& name) {
    const auto it = table().find(name);
    if (it == table().end()) throw InvalidConfig("unknown fixture '" + name + "'");
    return parse_config(it->second);
}

std::vector<std::string> fixture_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : table()) out.push_back(k);
    return out;
}

} // namespace axiflow
