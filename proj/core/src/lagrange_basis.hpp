#pragma once

#include <vector>

#include "hamflow/types.hpp"

namespace hamflow::detail {

/// Values and derivatives of the Lagrange basis on i/s at the quadrature nodes.
struct BasisTable {
    Mat l;   // (s+1) x m
    Mat dl;  // (s+1) x m, derivative in the unit variable tau

    BasisTable(int s, const std::vector<double>& c) : l(s + 1, c.size()), dl(s + 1, c.size()) {
        for (int i = 0; i <= s; ++i) {
            const double ti = static_cast<double>(i) / s;
            for (std::size_t j = 0; j < c.size(); ++j) {
                double val = 1.0;
                double der = 0.0;
                for (int k = 0; k <= s; ++k) {
                    if (k == i) continue;
                    const double tk = static_cast<double>(k) / s;
                    const double factor = (c[j] - tk) / (ti - tk);
                    der = der * factor + val / (ti - tk);
                    val *= factor;
                }
                l(i, j) = val;
                dl(i, j) = der;
            }
        }
    }
};

}  // namespace hamflow::detail
