#pragma once

#include "plap/fields.hpp"

namespace plap {

/// Vertex nearest to the centre of the bounding box (lowest index on ties).
Index center_vertex(const Mesh& mesh);

/// Volume of the cells sharing vertex v.
double patch_volume(const Mesh& mesh, Index v);

/// Approximate Dirac mass at v: the hat function scaled so that its
/// interpolant integrates to 1, i.e. value (N + 1) / patch_volume at v.
DiscreteFunction spike_datum(const Mesh& mesh, Index v);

/// prod_d sin(2 pi frequency x_d) over the embedding coordinates.
DiscreteFunction sin_datum(const Mesh& mesh, double frequency);

/// Solution of -(|u'|^(p-2) u')' = c on [0, length] with u(0) = u(length) = 0:
///   u(x) = sign(c) |c|^(1/(p-1)) [(length/2)^p' - |x - length/2|^p'] / p',  p' = p/(p-1).
double interval_closed_form(double x, double p, double length, double c);

struct IntervalErrors {
    double nodal_linf = 0.0; ///< max over vertices
    double linf = 0.0;       ///< max over vertices and 7 interior points per cell
    double l2 = 0.0;         ///< 5-point Gauss per cell
};

/// Errors of a P1 function on an interval mesh against interval_closed_form.
IntervalErrors interval_errors(const Mesh& mesh, const DiscreteFunction& u, double p, double c);

} // namespace plap
