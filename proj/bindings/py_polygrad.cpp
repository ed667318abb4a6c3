#include <pybind11/pybind11.h>
PYBIND11_MODULE(_polygrad, m) { m.doc() = "placeholder"; }
