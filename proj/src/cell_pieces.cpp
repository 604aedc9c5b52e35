#include "plap/cell_pieces.hpp"

#include "plap/error.hpp"

#include <algorithm>
#include <cmath>

namespace plap {

namespace {

bool is_constant(std::span<const double> w)
{
    return std::all_of(w.begin(), w.end(), [&](double x) { return x == w[0]; });
}

struct PolyVertex {
    std::array<double, 3> bary;
    double value;
};

using Polygon = std::vector<PolyVertex>;

// Keeps the part where side * (value - level) >= 0.
Polygon clip(const Polygon& poly, double level, double side)
{
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PolyVertex& P = poly[i];
        const PolyVertex& Q = poly[(i + 1) % n];
        const double dp = side * (P.value - level);
        const double dq = side * (Q.value - level);
        if (dp >= 0.0)
            out.push_back(P);
        if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
            const double t = dp / (dp - dq);
            PolyVertex X;
            for (int k = 0; k < 3; ++k)
                X.bary[k] = P.bary[k] + t * (Q.bary[k] - P.bary[k]);
            X.value = level;
            out.push_back(X);
        }
    }
    return out;
}

} // namespace

double fraction_above(std::span<const double> w, double level)
{
    if (w.size() == 2) {
        const double lo = std::min(w[0], w[1]), hi = std::max(w[0], w[1]);
        if (level >= hi)
            return 0.0;
        if (level < lo)
            return 1.0;
        return (hi - level) / (hi - lo);
    }
    if (w.size() == 3) {
        std::array<double, 3> s{w[0], w[1], w[2]};
        std::sort(s.begin(), s.end());
        const double a = s[0], b = s[1], c = s[2];
        if (level >= c)
            return 0.0;
        if (level < a)
            return 1.0;
        if (level < b)
            return 1.0 - (level - a) * (level - a) / ((b - a) * (c - a));
        return (c - level) * (c - level) / ((c - a) * (c - b));
    }
    throw DomainError("fraction_above: cells must have 2 or 3 nodes");
}

double fraction_abs_above(std::span<const double> w, double k)
{
    std::array<double, 3> neg{};
    for (std::size_t i = 0; i < w.size(); ++i)
        neg[i] = -w[i];
    return fraction_above(w, k) + fraction_above(std::span<const double>(neg.data(), w.size()), k);
}

double fraction_abs_at_least(std::span<const double> w, double k)
{
    if (is_constant(w))
        return std::abs(w[0]) >= k ? 1.0 : 0.0;
    return fraction_abs_above(w, k);
}

double fraction_abs_below(std::span<const double> w, double k)
{
    if (is_constant(w))
        return std::abs(w[0]) < k ? 1.0 : 0.0;
    return std::max(0.0, 1.0 - fraction_abs_above(w, k));
}

std::vector<CellPiece> split_cell(int dim, std::span<const double> w, std::span<const double> levels)
{
    std::vector<CellPiece> pieces;
    if (dim == 1) {
        std::vector<double> cuts{0.0, 1.0};
        const double dw = w[1] - w[0];
        if (dw != 0.0)
            for (double L : levels) {
                const double s = (L - w[0]) / dw;
                if (s > 0.0 && s < 1.0)
                    cuts.push_back(s);
            }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i], b = cuts[i + 1];
            if (!(b > a))
                continue;
            CellPiece piece;
            piece.vertices[0] = {1.0 - a, a, 0.0};
            piece.vertices[1] = {1.0 - b, b, 0.0};
            piece.fraction = b - a;
            pieces.push_back(piece);
        }
        return pieces;
    }
    if (dim != 2)
        throw DomainError("split_cell: dimension must be 1 or 2");

    std::vector<Polygon> polys{{{{1.0, 0.0, 0.0}, w[0]}, {{0.0, 1.0, 0.0}, w[1]}, {{0.0, 0.0, 1.0}, w[2]}}};
    for (double L : levels) {
        std::vector<Polygon> next;
        for (const Polygon& poly : polys) {
            const bool crosses =
                std::any_of(poly.begin(), poly.end(), [L](const PolyVertex& v) { return v.value < L; }) &&
                std::any_of(poly.begin(), poly.end(), [L](const PolyVertex& v) { return v.value > L; });
            if (!crosses) {
                next.push_back(poly);
                continue;
            }
            for (double side : {-1.0, 1.0}) {
                Polygon part = clip(poly, L, side);
                if (part.size() >= 3)
                    next.push_back(std::move(part));
            }
        }
        polys = std::move(next);
    }
    for (const Polygon& poly : polys)
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
            CellPiece piece;
            piece.vertices = {poly[0].bary, poly[i].bary, poly[i + 1].bary};
            const double ax = piece.vertices[1][1] - piece.vertices[0][1];
            const double ay = piece.vertices[1][2] - piece.vertices[0][2];
            const double bx = piece.vertices[2][1] - piece.vertices[0][1];
            const double by = piece.vertices[2][2] - piece.vertices[0][2];
            piece.fraction = std::abs(ax * by - ay * bx);
            if (piece.fraction > 0.0)
                pieces.push_back(piece);
        }
    return pieces;
}

std::array<double, 3> map_to_piece(const CellPiece& piece, int dim, const std::array<double, 3>& bary)
{
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int j = 0; j <= dim; ++j)
        for (int k = 0; k < 3; ++k)
            out[k] += bary[j] * piece.vertices[j][k];
    return out;
}

} // namespace plap
