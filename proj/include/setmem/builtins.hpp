#pragma once

#include <optional>
#include <string_view>

#include "setmem/linalg.hpp"

namespace setmem::builtins {

// The four 4x4 benchmark matrices. A1 is Schur stable with a large spectral
// norm; A2 = 1.1 * (a swap of the first two coordinates) has the unstable
// eigenvalue 1.1 with geometric multiplicity four; A3 and A4 are unstable.
Matrix a1();
Matrix a2();
Matrix a3();
Matrix a4();

// "A1".."A4"; nullopt for any other name.
std::optional<Matrix> lookup(std::string_view name);

}  // namespace setmem::builtins
