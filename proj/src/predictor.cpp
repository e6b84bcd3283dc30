#include "wtmp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "wtmp/numerics.hpp"

namespace wtmp {

namespace {

CMat hankel(const CVec& x, int q) {
  const Eigen::Index n = x.size();
  CMat d(q, n - q + 1);
  for (int i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j <= n - q; ++j) d(i, j) = x(i + j);
  return d;
}

/// Poles from the column-shift pencil of a Hankel matrix: the p largest-
/// magnitude eigenvalues of d(:, 2:) * pinv(d(:, :end-1)).
///
/// The pseudo-inverse keeps at most p singular directions. The window's
/// informative rank equals the model order, and its trailing singular values
/// are pure roundoff; a plain tolerance cut leaves some of them in whenever
/// the input carries accumulated rounding noise, and those near-null
/// directions alias into spurious O(1) eigenvalues that can outrank the true
/// unit-circle poles.
CVec pencil_poles(const CMat& d, int p) {
  const Eigen::Index cols = d.cols();
  const CMat first = d.leftCols(cols - 1);
  const CMat last = d.rightCols(cols - 1);

  Eigen::JacobiSVD<CMat> svd(first, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = double(std::max(first.rows(), first.cols())) *
                     std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && rank < p && sv(rank) > tol) ++rank;
  if (rank == 0)
    throw numerical_error("matrix pencil: rank-deficient shift window");
  const CMat pinv_first = svd.matrixV().leftCols(rank) *
                          sv.head(rank).cwiseInverse().asDiagonal() *
                          svd.matrixU().leftCols(rank).adjoint();

  CVec lambda = eig_general(last * pinv_first);
  std::sort(lambda.begin(), lambda.end(),
            [](const cxd& l, const cxd& r) { return std::abs(l) > std::abs(r); });
  return lambda.head(p);
}

/// Project the raw shift eigenvalues onto the identified model class. The
/// per-slot factors of this channel family are pure rotations, so only the
/// pole angle carries information: keeping the raw magnitude would compound
/// its estimation noise exponentially over the prediction horizon (a 5%
/// magnitude error grows to 5x after ~33 extrapolated slots). Near-zero
/// eigenvalues are rank-fill artifacts of an over-ordered fit and carry no
/// tone at all; they are dropped rather than normalized into spurious DC
/// terms.
CVec unit_circle_poles(const CVec& raw) {
  constexpr double kPoleFloor = 1e-6;
  CVec kept(raw.size());
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double mag = std::abs(raw(i));
    if (mag > kPoleFloor) kept(n++) = raw(i) / mag;
  }
  if (n == 0)
    throw numerical_error("matrix pencil: no significant poles in the fit");
  return kept.head(n);
}

void check_series(const CVec& series) {
  if (series.size() < 3)
    throw config_error("matrix pencil: series must have at least 3 samples");
  if (series.norm() == 0.0)
    throw numerical_error("matrix pencil: zero series has no pole structure");
}

int resolve_pencil_size(const PencilConfig& cfg, int n, int p,
                        PencilVariant variant) {
  if (p < 1) throw config_error("matrix pencil: model order must be >= 1");
  const int q =
      cfg.pencil_size > 0 ? cfg.pencil_size : default_pencil_size(n, p, variant);
  const int hi = variant == PencilVariant::difference ? n - p : n - p + 1;
  if (!(p < q && q < hi))
    throw config_error("matrix pencil: pencil size " + std::to_string(q) +
                       " outside the admissible range (" + std::to_string(p) +
                       ", " + std::to_string(hi) + ") for " + std::to_string(n) +
                       " samples");
  return q;
}

/// z^k by repeated multiplication: well-defined at z = 0 (spurious poles of
/// an over-ordered fit), unlike std::pow's exp/log route.
cxd zpow(cxd z, int k) {
  cxd v(1.0, 0.0);
  while (k-- > 0) v *= z;
  return v;
}

double pole_to_hz(const cxd& z, double f_c_hz, double f_sub_hz, double t_slot_s) {
  return std::arg(z) * f_c_hz / (2.0 * kPi * (f_c_hz + f_sub_hz) * t_slot_s);
}

RVec sorted_hz(const CVec& zhat, double f_c_hz, double f_sub_hz, double t_slot_s) {
  RVec w(zhat.size());
  for (Eigen::Index i = 0; i < zhat.size(); ++i)
    w(i) = pole_to_hz(zhat(i), f_c_hz, f_sub_hz, t_slot_s);
  std::sort(w.begin(), w.end());
  return w;
}

bool nearly_constant(const CVec& series) {
  const cxd mean = series.mean();
  double dev = 0.0, scale = std::abs(mean);
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    dev = std::max(dev, std::abs(series(i) - mean));
    scale = std::max(scale, std::abs(series(i)));
  }
  return dev <= 1e-12 * std::max(scale, 1e-300);
}

}  // namespace

int default_pencil_size(int n_samples, int p, PencilVariant variant) {
  if (p < 1) throw config_error("matrix pencil: model order must be >= 1");
  const int hi = variant == PencilVariant::difference ? n_samples - p
                                                      : n_samples - p + 1;
  if (!(p + 1 <= hi - 1))
    throw config_error("matrix pencil: no admissible pencil size for " +
                       std::to_string(n_samples) + " samples at order " +
                       std::to_string(p));
  return std::clamp(n_samples / 2, p + 1, hi - 1);
}

PencilFit mp_fit(const CVec& series, const PencilConfig& cfg, int p) {
  check_series(series);
  const int n = int(series.size());
  const int q = resolve_pencil_size(cfg, n, p, PencilVariant::standard);

  PencilFit fit;
  fit.d1 = hankel(series, q);
  fit.zhat = unit_circle_poles(pencil_poles(fit.d1, p));
  const Eigen::Index kept = fit.zhat.size();
  fit.e1.resize(q, kept);
  for (int i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < kept; ++j) fit.e1(i, j) = zpow(fit.zhat(j), i);
  const Eigen::Index cols = fit.d1.cols();
  fit.e2.resize(kept, cols);
  for (Eigen::Index j = 0; j < kept; ++j)
    for (Eigen::Index k = 0; k < cols; ++k)
      fit.e2(j, k) = zpow(fit.zhat(j), int(k));
  return fit;
}

CVec mp_fit_difference(const CVec& series, const PencilConfig& cfg, int p) {
  check_series(series);
  const int n = int(series.size());
  const int q = resolve_pencil_size(cfg, n, p, PencilVariant::difference);

  CVec diff = series.tail(n - 1) - series.head(n - 1);
  if (diff.norm() < 1e-13 * series.norm())
    throw numerical_error(
        "difference pencil: rank collapse (series is constant to working "
        "precision)");
  return unit_circle_poles(pencil_poles(hankel(diff, q), p));
}

RVec mp_estimate(const CVec& series, const PencilConfig& cfg, int p,
                 double f_c_hz, double f_sub_hz, double t_slot_s) {
  if (cfg.variant == PencilVariant::difference)
    return mp_estimate_difference(series, cfg, p, f_c_hz, f_sub_hz, t_slot_s);
  return sorted_hz(mp_fit(series, cfg, p).zhat, f_c_hz, f_sub_hz, t_slot_s);
}

RVec mp_estimate_difference(const CVec& series, const PencilConfig& cfg, int p,
                            double f_c_hz, double f_sub_hz, double t_slot_s) {
  return sorted_hz(mp_fit_difference(series, cfg, p), f_c_hz, f_sub_hz,
                   t_slot_s);
}

CVec extrapolate(const CMat& d1, const CVec& zhat, const CMat& e1,
                 const CMat& e2, int n_steps) {
  if (n_steps < 0) throw config_error("extrapolate: n_steps must be >= 0");
  if (e1.cols() != zhat.size() || e2.rows() != zhat.size() ||
      e1.rows() != d1.rows() || e2.cols() != d1.cols())
    throw config_error("extrapolate: inconsistent pencil fit shapes");
  CVec out(n_steps);
  if (n_steps == 0) return out;

  // Both projectors are constant across steps.
  const CMat left = e1 * zhat.asDiagonal() * pinv(e1);   // q x q
  const CMat right = pinv(e2) * e2;                      // cols x cols
  CMat window = d1;
  for (int s = 0; s < n_steps; ++s) {
    CMat next = left * window * right;
    out(s) = next(next.rows() - 1, next.cols() - 1);
    window.leftCols(window.cols() - 1) = window.rightCols(window.cols() - 1);
    window.col(window.cols() - 1) = next.col(next.cols() - 1);
  }
  return out;
}

CMat angular_project(const CMat& h, const ArrayGeometry& geom) {
  geom.validate();
  if (h.rows() != geom.n_elements())
    throw config_error("angular_project: row count must match the array");
  const CMat wh = dft_matrix<double>(geom.n_h);
  const CMat wv = dft_matrix<double>(geom.n_v);
  CMat out(h.rows(), h.cols());
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    Eigen::Map<const CMat> x(h.col(c).data(), geom.n_v, geom.n_h);
    CMat y = wv.adjoint() * x * wh.conjugate();
    out.col(c) = Eigen::Map<const CVec>(y.data(), y.size());
  }
  return out;
}

CMat angular_synthesize(const CMat& zmat, const ArrayGeometry& geom) {
  geom.validate();
  if (zmat.rows() != geom.n_elements())
    throw config_error("angular_synthesize: row count must match the array");
  const CMat wh = dft_matrix<double>(geom.n_h);
  const CMat wv = dft_matrix<double>(geom.n_v);
  CMat out(zmat.rows(), zmat.cols());
  for (Eigen::Index c = 0; c < zmat.cols(); ++c) {
    Eigen::Map<const CMat> x(zmat.col(c).data(), geom.n_v, geom.n_h);
    CMat y = wv * x * wh.transpose();
    out.col(c) = Eigen::Map<const CVec>(y.data(), y.size());
  }
  return out;
}

CVec ProjectedSeries::chi(std::size_t i) const {
  if (i >= constituents.size())
    throw config_error("ProjectedSeries::chi: index out of range");
  return constituents[i].rowwise().sum();
}

ProjectedSeries project(const std::vector<ChannelSnapshot>& samples,
                        const ArrayGeometry& geom, const TransformMatrix& bn,
                        const TfDictionary& tf, double gamma1) {
  const auto& cfg = tf.config();
  if (!(gamma1 > 0.0 && gamma1 <= 1.0))
    throw config_error("project: gamma1 must lie in (0, 1]");
  if (int(samples.size()) != cfg.n_s)
    throw config_error("project: record length must equal the dictionary n_s");
  if (bn.n_t() != geom.n_elements())
    throw config_error("project: transform size must match the array");
  const double t_tol = 1e-6 * cfg.t_slot_s;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].h.rows() != geom.n_elements() || samples[k].h.cols() != cfg.n_f)
      throw config_error("project: snapshot dimensions must match the layout");
    if (k > 0 &&
        std::abs(samples[k].t - samples[k - 1].t - cfg.t_slot_s) > t_tol)
      throw config_error("project: snapshots must be equally spaced at T");
  }

  const int n_s = cfg.n_s, n_f = cfg.n_f;
  const Eigen::Index n_t = geom.n_elements();

  ProjectedSeries out;
  out.gamma1 = gamma1;
  out.z.reserve(samples.size());
  out.times.reserve(samples.size());
  for (const auto& s : samples) {
    out.z.push_back(angular_project(bn.apply(s.h), geom));
    out.times.push_back(s.t);
  }

  // Record statistic: time-matched correlations averaged over snapshots.
  std::vector<CMat> stat(n_s);  // per doppler bin: n_t x n_f
  for (int bin = 1; bin <= n_s; ++bin) {
    CMat acc = CMat::Zero(n_t, n_f);
    for (int k = 1; k <= n_s; ++k)
      acc += out.z[k - 1] * tf.block(bin, k).conjugate();
    stat[bin - 1] = acc / double(n_s);
  }

  struct Entry {
    double mag;
    std::size_t linear;
    SupportIndex idx;
  };
  std::vector<Entry> entries;
  entries.reserve(std::size_t(n_s) * n_f * n_t);
  double total = 0.0;
  for (int bin = 1; bin <= n_s; ++bin)
    for (int kd = 0; kd < n_f; ++kd)
      for (Eigen::Index ma = 0; ma < n_t; ++ma) {
        // Energy (squared-magnitude) weighting: an amplitude sum would let a
        // wide floor of near-zero bins (noisy observations) dominate the
        // total and drag the prefix deep into the tail.
        const double mag = std::norm(stat[bin - 1](ma, kd));
        const std::size_t linear =
            (std::size_t(bin - 1) * n_f + kd) * std::size_t(n_t) + ma;
        entries.push_back({mag, linear, SupportIndex{bin, kd, ma}});
        total += mag;
      }
  out.total_weight = total;

  if (total == 0.0) {
    out.empty_support = true;
    out.weights.resize(0);
    return out;
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    return a.linear < b.linear;
  });
  double captured = 0.0;
  std::size_t count = 0;
  while (count < entries.size() && captured < gamma1 * total) {
    captured += entries[count].mag;
    ++count;
  }
  out.captured_weight = captured;

  out.support.reserve(count);
  out.constituents.reserve(count);
  out.weights.resize(Eigen::Index(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = entries[i];
    out.support.push_back(e.idx);
    out.weights(Eigen::Index(i)) = e.mag;
    CMat c(n_s, n_f);
    for (int k = 1; k <= n_s; ++k) {
      const CMat& w = tf.block(e.idx.doppler_bin, k);
      for (int m = 0; m < n_f; ++m)
        c(k - 1, m) =
            std::conj(w(m, e.idx.delay_bin)) * out.z[k - 1](e.idx.angular_bin, m);
    }
    out.constituents.push_back(std::move(c));
  }
  return out;
}

namespace {

/// Continue one correlation series cfg.n_predict steps; constant series (and
/// per-series pencil degeneracies) fall back to holding the last value.
cxd continue_series(const CVec& series, const PencilConfig& cfg, int p) {
  if (cfg.n_predict == 0 || nearly_constant(series))
    return series(series.size() - 1);
  try {
    if (cfg.variant == PencilVariant::difference) {
      const CVec zhat = mp_fit_difference(series, cfg, p);
      // Re-fit amplitudes of c0 + sum_q c_q z^k on the raw series; the
      // difference step discards the constant term.
      const Eigen::Index n = series.size();
      const Eigen::Index kept = zhat.size();
      CMat v(n, kept + 1);
      for (Eigen::Index k = 0; k < n; ++k) {
        v(k, 0) = 1.0;
        for (Eigen::Index q = 0; q < kept; ++q)
          v(k, q + 1) = zpow(zhat(q), int(k));
      }
      const CVec coef = pinv(v) * series;
      cxd value = coef(0);
      for (Eigen::Index q = 0; q < kept; ++q)
        value += coef(q + 1) * zpow(zhat(q), int(n) - 1 + cfg.n_predict);
      return value;
    }
    const PencilFit fit = mp_fit(series, cfg, p);
    const CVec future = extrapolate(fit.d1, fit.zhat, fit.e1, fit.e2, cfg.n_predict);
    return future(cfg.n_predict - 1);
  } catch (const numerical_error&) {
    return series(series.size() - 1);
  }
}

}  // namespace

ChannelSnapshot predict_channel(const std::vector<ChannelSnapshot>& samples,
                                const ArrayGeometry& geom, const PathEstimate& est,
                                const TransformMatrix& bn, const TfDictionary& tf,
                                const PencilConfig& cfg, double gamma1,
                                int p_override, ProjectedSeries* series_out) {
  const auto& scfg = tf.config();
  if (cfg.n_predict < 0)
    throw config_error("predict_channel: n_predict must be >= 0");
  const int p = p_override > 0 ? p_override : est.p_hat;
  if (p < 1 && cfg.n_predict > 0)
    throw config_error("predict_channel: model order must be >= 1");

  ProjectedSeries series = project(samples, geom, bn, tf, gamma1);

  ChannelSnapshot out;
  out.t = samples.back().t + cfg.n_predict * scfg.t_slot_s;
  if (series.empty_support) {
    out.h = CMat::Zero(geom.n_elements(), scfg.n_f);
    out.empty_prediction = true;
    if (series_out) *series_out = std::move(series);
    return out;
  }

  // Group the support by (delay, angular) cell, keeping first-seen
  // (descending-statistic) order. The Doppler-bin correlations within one cell
  // are redundant copies of the same underlying coefficient — each kept bin's
  // continued series, re-modulated by its own future block, estimates the same
  // future cell value — so the synthesis averages the kept bins per cell. With
  // the full support (gamma1 = 1) every cell holds all n_s bins and the
  // average reduces to the exact frame inverse; with a sparse support each
  // cell still contributes at full amplitude.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < series.support.size(); ++i) {
    const auto& s = series.support[i];
    const auto key = std::make_pair(s.delay_bin, s.angular_bin);
    auto it = std::find(cells.begin(), cells.end(), key);
    if (it == cells.end()) {
      cells.push_back(key);
      members.emplace_back();
      it = std::prev(cells.end());
    }
    members[std::size_t(it - cells.begin())].push_back(i);
  }

  const int n_s = scfg.n_s, n_f = scfg.n_f;
  const int t_future = n_s + cfg.n_predict;
  CMat z_pred = CMat::Zero(geom.n_elements(), n_f);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [kd, ma] = cells[c];
    CVec cell_acc = CVec::Zero(n_f);
    for (const std::size_t i : members[c]) {
      const CMat& cons = series.constituents[i];
      // Per-subcarrier continuation, then aggregate into the scalar future
      // coefficient for this (bin, delay, angular) index.
      cxd chi_hat = 0.0;
      for (int m = 0; m < n_f; ++m)
        chi_hat += continue_series(cons.col(m), cfg, p);
      const CMat& w_future = tf.block(series.support[i].doppler_bin, t_future);
      cell_acc += chi_hat * w_future.col(kd);
    }
    z_pred.row(ma) += cell_acc.transpose() / double(members[c].size());
  }

  out.h = bn.unapply(angular_synthesize(z_pred, geom));
  if (series_out) *series_out = std::move(series);
  return out;
}

}  // namespace wtmp
