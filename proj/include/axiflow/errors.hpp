#pragma once

#include <stdexcept>
#include <string>

namespace axiflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidCurve : public Error { public: using Error::Error; };
class ZeroLengthElement : public Error { public: using Error::Error; };
class OpenSurface : public Error { public: using Error::Error; };
class AssumptionViolated : public Error { public: using Error::Error; };
class SingularSystem : public Error { public: using Error::Error; };
class NoConvergence : public Error { public: using Error::Error; };
class DomainViolation : public Error { public: using Error::Error; };
class StabilityViolation : public Error { public: using Error::Error; };
class InvalidConfig : public Error { public: using Error::Error; };
class PastExtinction : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };

} // namespace axiflow
