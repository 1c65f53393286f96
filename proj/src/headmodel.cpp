#include "icabench/headmodel.hpp"

#include "icabench/io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace icabench {

using nlohmann::json;

void HeadModel::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(radii_mm[i] > 0.0)) {
      throw ValidationError("head model: radii must be positive");
    }
    if (!(conductivities[i] > 0.0)) {
      throw ValidationError("head model: conductivities must be positive");
    }
    if (i > 0 && !(radii_mm[i] > radii_mm[i - 1])) {
      throw ValidationError("head model: radii must be strictly ascending");
    }
  }
}

HeadModel load_headmodel_json(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': malformed head model at byte " +
                     std::to_string(e.byte));
  }
  HeadModel h;
  try {
    auto radii = j.at("radii_mm").get<std::vector<double>>();
    auto cond = j.at("conductivities").get<std::vector<double>>();
    if (radii.size() != 4 || cond.size() != 4) {
      throw ParseError("'" + path.string() + "': need exactly 4 radii and 4 conductivities");
    }
    std::copy(radii.begin(), radii.end(), h.radii_mm.begin());
    std::copy(cond.begin(), cond.end(), h.conductivities.begin());
  } catch (const json::exception& e) {
    throw ParseError("'" + path.string() + "': bad head model field: " + e.what());
  }
  h.validate();
  return h;
}

void save_headmodel_json(const HeadModel& h, const std::filesystem::path& path) {
  json j;
  j["radii_mm"] = h.radii_mm;
  j["conductivities"] = h.conductivities;
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<Eigen::Index> Montage::active_indices() const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!is_excluded(electrodes[static_cast<std::size_t>(i)])) {
      idx.push_back(i);
    }
  }
  return idx;
}

Montage load_montage_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  Montage m;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Electrode e;
    char c1, c2, c3;
    if (!(std::getline(ls, e.label, ',') &&
          (ls >> e.position_mm.x() >> c1 >> e.position_mm.y() >> c2 >> e.position_mm.z()) &&
          c1 == ',' && c2 == ',')) {
      throw ParseError("'" + path.string() + "': line " + std::to_string(line_no) +
                       ": expected label,x_mm,y_mm,z_mm");
    }
    (void)c3;
    m.electrodes.push_back(std::move(e));
  }
  if (m.electrodes.empty()) {
    throw ParseError("'" + path.string() + "': no electrodes");
  }
  return m;
}

void save_montage_csv(const Montage& m, const std::filesystem::path& path) {
  std::ostringstream out;
  char buf[128];
  for (const auto& e : m.electrodes) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", e.label.c_str(),
                  e.position_mm.x(), e.position_mm.y(), e.position_mm.z());
    out << buf;
  }
  write_file_atomic(path, out.str());
}

Montage make_spiral_montage(int n, const HeadModel& head, double z_min_frac) {
  if (n < 4) {
    throw ValidationError("montage needs at least 4 electrodes");
  }
  head.validate();
  Montage m;
  const double r = head.outer_radius();
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  char label[16];
  for (int i = 0; i < n; ++i) {
    // z descends from near the vertex to the cap edge.
    const double z = 1.0 - (1.0 - z_min_frac) * (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    Electrode e;
    std::snprintf(label, sizeof(label), "E%02d", i + 1);
    e.label = label;
    e.position_mm = r * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
    m.electrodes.push_back(std::move(e));
  }
  return m;
}

ForwardModel::ForwardModel(const HeadModel& head, const Montage& montage, int max_degree)
    : head_(head), max_degree_(max_degree) {
  head_.validate();
  if (max_degree_ < 20) {
    throw ValidationError("forward model: max_degree must be >= 20");
  }
  active_ = montage.active_indices();
  if (active_.size() < 4) {
    throw ValidationError("forward model: need at least 4 non-excluded electrodes, have " +
                          std::to_string(active_.size()));
  }

  const double scalp = head_.outer_radius();
  directions_.resize(montage.size(), 3);
  for (Eigen::Index i = 0; i < montage.size(); ++i) {
    const auto& e = montage.electrodes[static_cast<std::size_t>(i)];
    const double norm = e.position_mm.norm();
    if (!(norm > 0.0)) {
      throw ValidationError("forward model: electrode '" + e.label + "' at the origin");
    }
    if (!montage.is_excluded(e) && std::abs(norm - scalp) > 0.05 * scalp) {
      throw ValidationError("forward model: electrode '" + e.label + "' is " +
                            std::to_string(norm) + " mm from the center, more than 5% off " +
                            "the scalp radius " + std::to_string(scalp));
    }
    directions_.row(i) = (e.position_mm / norm).transpose();
  }

  // Per-degree gain of the shell stack relative to the free-space dipole
  // coefficient: propagate (a, b) radial coefficients across the three
  // interior boundaries and close with zero radial current at the scalp.
  shell_gain_.resize(max_degree_ + 1);
  shell_gain_[0] = 0.0;
  for (int l = 1; l <= max_degree_; ++l) {
    const double dl = static_cast<double>(l);
    // Coefficients of the source term b * x^-(l+1): start (a, b) = (alpha, 1)
    // in region 1 with alpha unknown; track u = T (1, 0) and v = T (0, 1).
    Eigen::Vector2d u(1.0, 0.0);
    Eigen::Vector2d v(0.0, 1.0);
    for (int shell = 0; shell < 3; ++shell) {
      const double x = head_.radii_mm[shell] / head_.outer_radius();
      const double s1 = head_.conductivities[shell];
      const double s2 = head_.conductivities[shell + 1];
      const double xl = std::pow(x, dl);
      const double xm = std::pow(x, -(dl + 1.0));
      Eigen::Matrix2d inner;
      inner << xl, xm, s1 * dl * xl / x, -s1 * (dl + 1.0) * xm / x;
      Eigen::Matrix2d outer;
      outer << xl, xm, s2 * dl * xl / x, -s2 * (dl + 1.0) * xm / x;
      const Eigen::Matrix2d transfer = outer.inverse() * inner;
      u = transfer * u;
      v = transfer * v;
    }
    // Outer boundary (x = 1): l * a4 - (l+1) * b4 = 0.
    const double denom = dl * u[0] - (dl + 1.0) * u[1];
    const double alpha = ((dl + 1.0) * v[1] - dl * v[0]) / denom;
    shell_gain_[l] = (alpha * u[0] + v[0]) + (alpha * u[1] + v[1]);
  }
}

Matrix ForwardModel::leadfield(const Eigen::Vector3d& position_mm) const {
  const double scalp = head_.outer_radius();
  const double b = position_mm.norm();
  if (!(b < head_.inner_radius())) {
    throw ValidationError("dipole at " + std::to_string(b) +
                          " mm lies outside the innermost shell (radius " +
                          std::to_string(head_.inner_radius()) + " mm)");
  }
  const Eigen::Vector3d b_hat = b > 1e-12 ? (position_mm / b).eval()
                                          : Eigen::Vector3d(0.0, 0.0, 1.0);
  const double t = b / scalp;
  const double scale = 1.0 / (4.0 * M_PI * head_.conductivities[0] * scalp * scalp);

  const Eigen::Index m = directions_.rows();
  Matrix lead = Matrix::Zero(m, 3);
  Vector u(m), p_prev(m), p_cur(m), dp_prev(m), dp_cur(m);
  u = directions_ * b_hat;
  p_prev.setOnes();   // P_0
  p_cur = u;          // P_1
  dp_prev.setZero();  // P_0'
  dp_cur.setOnes();   // P_1'

  double t_power = 1.0;  // t^(l-1)
  double max_abs = 0.0;
  int quiet_degrees = 0;
  int l = 1;
  for (; l <= max_degree_; ++l) {
    const double dl = static_cast<double>(l);
    const double coeff = scale * shell_gain_[l] * t_power;
    double term_max = 0.0;
    for (Eigen::Index e = 0; e < m; ++e) {
      // Gradient of the solid harmonic: l P_l(u) b_hat + P_l'(u)(r_hat - u b_hat).
      const Eigen::Vector3d r_hat = directions_.row(e).transpose();
      const Eigen::Vector3d k =
          coeff * (dl * p_cur[e] * b_hat + dp_cur[e] * (r_hat - u[e] * b_hat));
      lead.row(e) += k.transpose();
      term_max = std::max(term_max, k.cwiseAbs().maxCoeff());
    }
    max_abs = std::max(max_abs, lead.cwiseAbs().maxCoeff());
    if (max_abs > 0.0 && term_max < 1e-12 * max_abs) {
      if (++quiet_degrees >= 3) {
        ++l;
        break;
      }
    } else {
      quiet_degrees = 0;
    }

    // Advance recurrences to degree l+1.
    t_power *= t;
    Vector p_next =
        ((2.0 * dl + 1.0) * u.cwiseProduct(p_cur) - dl * p_prev) / (dl + 1.0);
    Vector dp_next = dp_prev + (2.0 * dl + 1.0) * p_cur;
    p_prev.swap(p_cur);
    p_cur = std::move(p_next);
    dp_prev.swap(dp_cur);
    dp_cur = std::move(dp_next);
  }
  if (l > max_degree_ && quiet_degrees < 3 && t > 0.0) {
    const double tail = t_power;  // remaining terms shrink roughly like t^l
    if (tail > 1e-9) {
      throw NumericalError(
          "forward series did not converge at eccentricity " + std::to_string(t) +
          " within " + std::to_string(max_degree_) +
          " degrees; increase max_degree");
    }
  }
  return lead;
}

void ForwardModel::average_reference(Vector& map) const {
  double mean = 0.0;
  for (auto i : active_) mean += map[i];
  mean /= static_cast<double>(active_.size());
  map.array() -= mean;
}

Vector ForwardModel::potential(const Dipole& dipole) const {
  Vector map = leadfield(dipole.position_mm) * dipole.moment;
  average_reference(map);
  return map;
}

Vector forward_potential(const Dipole& dipole, const Montage& montage,
                         const HeadModel& head, int max_degree) {
  return ForwardModel(head, montage, max_degree).potential(dipole);
}

}  // namespace icabench
