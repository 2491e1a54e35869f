#pragma once

#include <vector>

namespace hte {

// Solves A x = b for symmetric positive-definite A (dense, row-major, p x p)
// via Cholesky. Returns false when the factorization breaks down.
bool cholesky_solve(std::vector<double> a, std::size_t p, const std::vector<double>& b,
                    std::vector<double>& x);

// Inverse of a symmetric positive-definite matrix; false on breakdown.
bool spd_inverse(std::vector<double> a, std::size_t p, std::vector<double>& inv);

}  // namespace hte
