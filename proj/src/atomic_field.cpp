#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msq/squarefn.hpp"

namespace msq {

AtomicField::AtomicField(int dimension, std::vector<Atom> atoms) : n_(dimension), atoms_(std::move(atoms)) {
  if (n_ != 1 && n_ != 2) throw std::invalid_argument("atomic field dimension must be 1 or 2");
  for (const Atom& a : atoms_)
    if (!(a.t > 0.0) || !(a.c > 0.0) || !std::isfinite(a.t) || !std::isfinite(a.c))
      throw std::invalid_argument("atoms need t > 0 and c > 0");
}

double s_alpha_field(const AtomicField& F, double alpha, const Point& x) {
  if (!(alpha > 0.0)) throw std::invalid_argument("aperture must be positive");
  double s = 0.0;
  for (const Atom& a : F.atoms()) {
    const double d = F.dimension() == 1 ? std::abs(x[0] - a.y[0]) : std::hypot(x[0] - a.y[0], x[1] - a.y[1]);
    if (d < alpha * a.t) s += a.c;
  }
  return std::sqrt(s);
}

double s_alpha_field_weak_norm(const AtomicField& F, double alpha, double p, const DyadicMesh* eval) {
  if (!(p > 0.0)) throw std::invalid_argument("weak norm requires p > 0");
  std::vector<std::pair<double, double>> pieces;
  if (F.dimension() == 1) {
    // S_α F is constant between consecutive endpoints y_j ± α t_j.
    std::vector<double> ends;
    for (const Atom& a : F.atoms()) {
      ends.push_back(a.y[0] - alpha * a.t);
      ends.push_back(a.y[0] + alpha * a.t);
    }
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
      const double mid = 0.5 * (ends[i] + ends[i + 1]);
      pieces.emplace_back(s_alpha_field(F, alpha, {mid, 0.0}), ends[i + 1] - ends[i]);
    }
  } else {
    if (!eval || eval->dimension() != 2) throw std::invalid_argument("2-D atomic fields need an evaluation mesh");
    const double mu = eval->cell_measure();
    for (std::size_t i = 0; i < eval->cell_count(); ++i)
      pieces.emplace_back(s_alpha_field(F, alpha, eval->cell_center(i)), mu);
  }
  return weak_norm_from_pieces(std::move(pieces), p);
}

WeakApertureReport weak_aperture_check(const AtomicField& F, double alpha, double p, const DyadicMesh* eval) {
  if (!(p > 0.0 && p < 2.0)) throw std::invalid_argument("weak aperture check needs 0 < p < 2");
  if (!(alpha >= 1.0)) throw std::invalid_argument("weak aperture check needs α >= 1");
  WeakApertureReport r;
  r.weak_one = s_alpha_field_weak_norm(F, 1.0, p, eval);
  if (!(r.weak_one > 0.0)) throw std::domain_error("S_1(F) vanishes identically");
  r.weak_alpha = s_alpha_field_weak_norm(F, alpha, p, eval);
  r.normalized_ratio = r.weak_alpha / (std::pow(alpha, F.dimension() / p) * r.weak_one);
  return r;
}

AtomicField random_atomic_field(Rng& rng, int dimension, std::size_t atoms) {
  std::vector<Atom> out(atoms);
  for (Atom& a : out) {
    a.y[0] = rng.uniform(-1.0, 1.0);
    if (dimension == 2) a.y[1] = rng.uniform(-1.0, 1.0);
    a.t = std::pow(10.0, rng.uniform(-2.0, 0.0));
    a.c = 1.0 - rng.uniform();
  }
  return AtomicField(dimension, std::move(out));
}

}  // namespace msq
