#include "setmem/builtins.hpp"

namespace setmem::builtins {

Matrix a1() {
    Matrix m(4, 4);
    m << 0.76, 0.00, 1.60, 1.60,
         0.00, 0.78, 0.00, 1.60,
         0.00, 0.00, 0.79, 0.00,
         0.00, 0.00, 0.00, 0.79;
    return m;
}

Matrix a2() {
    Matrix m(4, 4);
    m << 0.0, 1.1, 0.0, 0.0,
         1.1, 0.0, 0.0, 0.0,
         0.0, 0.0, 1.1, 0.0,
         0.0, 0.0, 0.0, 1.1;
    return m;
}

Matrix a3() {
    Matrix m(4, 4);
    m << 0.91, 0.70, 0.00, 0.00,
         0.70, 0.00, 0.00, 0.00,
         0.00, 0.00, 0.28, 0.00,
         0.00, 0.00, 0.00, 1.05;
    return m;
}

Matrix a4() {
    Matrix m(4, 4);
    m << 0.00, 0.00, 0.98, 0.00,
         0.00, 0.00, 0.00, 0.77,
         0.98, 0.00, 0.56, 0.00,
         0.00, 0.84, 0.00, 0.14;
    return m;
}

std::optional<Matrix> lookup(std::string_view name) {
    if (name == "A1") return a1();
    if (name == "A2") return a2();
    if (name == "A3") return a3();
    if (name == "A4") return a4();
    return std::nullopt;
}

}  // namespace setmem::builtins
