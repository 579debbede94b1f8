#pragma once

#include <stdexcept>
#include <string>

namespace plmm {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PLMM_DEFINE_ERROR(Name)                 \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(#Name ": " + what) {}           \
  }

PLMM_DEFINE_ERROR(NotZeroStable);
PLMM_DEFINE_ERROR(InconsistentPair);
PLMM_DEFINE_ERROR(ReduciblePair);
PLMM_DEFINE_ERROR(OrderMismatch);
PLMM_DEFINE_ERROR(BadGrid);
PLMM_DEFINE_ERROR(LengthMismatch);
PLMM_DEFINE_ERROR(NonFinite);
PLMM_DEFINE_ERROR(BadParams);
PLMM_DEFINE_ERROR(NotHamiltonian);
PLMM_DEFINE_ERROR(FixedPointDiverged);
PLMM_DEFINE_ERROR(NoExactSolution);
PLMM_DEFINE_ERROR(BlowUp);
PLMM_DEFINE_ERROR(MissingProbe);
PLMM_DEFINE_ERROR(DegenerateWindow);
PLMM_DEFINE_ERROR(ConfigError);
PLMM_DEFINE_ERROR(UnknownMethod);

#undef PLMM_DEFINE_ERROR

}  // namespace plmm
