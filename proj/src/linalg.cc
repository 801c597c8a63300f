#include "ddmrc/linalg.h"

namespace ddmrc {

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite:
      return "PositiveDefinite";
    case Definiteness::PositiveSemidefinite:
      return "PositiveSemidefinite";
    case Definiteness::Indefinite:
      return "Indefinite";
    case Definiteness::NegativeSemidefinite:
      return "NegativeSemidefinite";
    case Definiteness::NegativeDefinite:
      return "NegativeDefinite";
    case Definiteness::Zero:
      return "Zero";
  }
  return "Unknown";
}

}  // namespace ddmrc
