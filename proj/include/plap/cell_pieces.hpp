#pragma once

#include <array>
#include <span>
#include <vector>

namespace plap {

// Exact level-set geometry of a linear function on a single simplex
// (segment or triangle), given by its nodal values. Fractions are relative to
// the cell volume.

/// Fraction of the cell where w > level.
double fraction_above(std::span<const double> w, double level);

/// Fraction where |w| > k (k >= 0).
double fraction_abs_above(std::span<const double> w, double k);

/// Fraction where |w| >= k (k > 0); differs from fraction_abs_above only on
/// constant cells with |w| == k.
double fraction_abs_at_least(std::span<const double> w, double k);

/// Fraction where |w| < k (k > 0).
double fraction_abs_below(std::span<const double> w, double k);

/// A sub-simplex of a cell, in barycentric coordinates of the parent cell.
struct CellPiece {
    std::array<std::array<double, 3>, 3> vertices{}; // first N+1 used
    double fraction = 0.0;                            // volume relative to the parent
};

/// Splits the reference simplex of dimension `dim` along w = level for every
/// level, so that w - level has constant sign on each piece. Pieces of zero
/// volume are dropped.
std::vector<CellPiece> split_cell(int dim, std::span<const double> w, std::span<const double> levels);

/// Barycentric coordinates of a rule point mapped into a piece.
std::array<double, 3> map_to_piece(const CellPiece& piece, int dim, const std::array<double, 3>& bary);

/// Value of the linear interpolant with nodal values w at barycentric point b.
inline double eval_linear(std::span<const double> w, const std::array<double, 3>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * b[i];
    return s;
}

} // namespace plap
