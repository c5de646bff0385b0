#include "feel/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "feel/errors.hpp"

namespace feel::oracle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Offsets of each layer's weight and bias blocks in a flat vector.
struct Layout {
  std::vector<std::size_t> weights;
  std::vector<std::size_t> biases;
  std::size_t total = 0;
};

Layout layout_of(const std::vector<std::size_t>& arch) {
  Layout out;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    out.weights.push_back(off);
    off += arch[l + 1] * arch[l];
    out.biases.push_back(off);
    off += arch[l + 1];
  }
  out.total = off;
  return out;
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pre-activations of every layer for one sample.
std::vector<Eigen::VectorXd> forward_all(const std::vector<std::size_t>& arch, const Layout& lay,
                                         std::span<const double> theta, const Eigen::VectorXd& x) {
  std::vector<Eigen::VectorXd> z;
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(arch[l + 1]);
    const auto cols = static_cast<Eigen::Index>(arch[l]);
    Eigen::Map<const RowMajor> w(theta.data() + lay.weights[l], rows, cols);
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + lay.biases[l], rows);
    Eigen::VectorXd zl = w * a + b;
    a = zl.cwiseMax(0.0);
    z.push_back(std::move(zl));
  }
  return z;
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += std::exp(z[i] - m);
  return m + std::log(s);
}

// Mean-loss gradient over a batch, accumulated sample by sample.
void batch_gradient(const std::vector<std::size_t>& arch, const Layout& lay, std::span<const double> theta,
                    const LabeledDataset& data, std::span<const std::size_t> batch, std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t depth = arch.size() - 1;
  for (const std::size_t idx : batch) {
    const Eigen::VectorXd x = data.features.col(static_cast<Eigen::Index>(idx));
    const auto z = forward_all(arch, lay, theta, x);
    Eigen::VectorXd delta = (z.back().array() - log_sum_exp(z.back())).exp();
    delta[data.labels[idx]] -= 1.0;
    for (std::size_t l = depth; l-- > 0;) {
      const Eigen::VectorXd a = l == 0 ? x : Eigen::VectorXd(z[l - 1].cwiseMax(0.0));
      const std::size_t out = arch[l + 1];
      const std::size_t in = arch[l];
      for (std::size_t i = 0; i < out; ++i) {
        for (std::size_t j = 0; j < in; ++j) {
          grad[lay.weights[l] + i * in + j] += delta[static_cast<Eigen::Index>(i)] * a[static_cast<Eigen::Index>(j)];
        }
        grad[lay.biases[l] + i] += delta[static_cast<Eigen::Index>(i)];
      }
      if (l > 0) {
        Eigen::VectorXd back = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(in));
        for (std::size_t i = 0; i < out; ++i) {
          for (std::size_t j = 0; j < in; ++j) {
            back[static_cast<Eigen::Index>(j)] +=
                theta[lay.weights[l] + i * in + j] * delta[static_cast<Eigen::Index>(i)];
          }
        }
        for (std::size_t j = 0; j < in; ++j) {
          if (!(z[l - 1][static_cast<Eigen::Index>(j)] > 0.0)) back[static_cast<Eigen::Index>(j)] = 0.0;
        }
        delta = std::move(back);
      }
    }
  }
  const double n = static_cast<double>(batch.size());
  for (double& g : grad) g /= n;
}

}  // namespace

double lambert_w0_newton(double x) {
  if (x < -1.0 / std::numbers::e) {
    throw DomainError("lambert_w0_newton: x below -1/e");
  }
  double w;
  if (x < -0.3) {
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    w = -1.0 + p - p * p / 3.0;
  } else {
    w = std::log1p(x);
  }
  for (int i = 0; i < 500; ++i) {
    const double ew = std::exp(w);
    const double denom = ew * (w + 1.0);
    if (denom == 0.0) break;
    const double step = (w * ew - x) / denom;
    w -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

GridMin grid_argmin(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  GridMin best{lo, kInf};
  if (points < 2 || hi <= lo) {
    return {lo, f(lo)};
  }
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best.min_value) best = {x, v};
  }
  return best;
}

double upload_energy(double t_up, double bandwidth_hz, double beta, double model_bits) {
  return t_up * bandwidth_hz * (std::pow(2.0, model_bits / (t_up * bandwidth_hz)) - 1.0) / beta;
}

Interval upload_interval(const Workload& w, double deadline, const DeviceBounds& bounds) {
  const double rho = w.cycles_per_sample * (static_cast<double>(w.epochs) * static_cast<double>(w.dataset_size) -
                                            static_cast<double>(w.excluded) * (static_cast<double>(w.epochs) - 1.0));
  return {std::max(1e-12, deadline - rho / bounds.f_min), deadline - rho / bounds.f_max};
}

double round_energy(const Workload& w, double deadline, double bandwidth_hz, double beta,
                    const DeviceBounds& bounds, double t_up) {
  const double d = static_cast<double>(w.dataset_size);
  const double k = static_cast<double>(w.excluded);
  const double eps = static_cast<double>(w.epochs);
  const double rho = w.cycles_per_sample * (eps * d - k * (eps - 1.0));
  const double t_cmp = deadline - t_up;
  if (!(t_cmp > 0.0)) return kInf;

  const double p = bandwidth_hz * (std::pow(2.0, w.model_bits / (t_up * bandwidth_hz)) - 1.0) / beta;
  double e_up;
  if (p > bounds.p_max) {
    return kInf;
  } else if (p < bounds.p_min) {
    const double rate = bandwidth_hz * std::log2(1.0 + beta * bounds.p_min / bandwidth_hz);
    e_up = bounds.p_min * w.model_bits / rate;
  } else {
    e_up = p * t_up;
  }
  const double f = std::max(rho / t_cmp, bounds.f_min);
  // Term by term: ε−1 epochs over the kept samples, one over all of them.
  const double e_cmp = bounds.capacitance_alpha / 2.0 * (eps - 1.0) * f * f * (d - k) * w.cycles_per_sample +
                       bounds.capacitance_alpha / 2.0 * f * f * d * w.cycles_per_sample;
  return e_cmp + e_up;
}

double min_bandwidth_grid(double t, double power_w, double beta, double model_bits, double lo, double hi,
                          std::size_t points) {
  const double need = model_bits / t;
  const auto rate = [&](double bw) { return bw * std::log2(1.0 + beta * power_w / bw); };
  const double ratio = std::log(hi / lo) / static_cast<double>(points - 1);
  double prev = lo;
  for (std::size_t i = 0; i < points; ++i) {
    const double bw = lo * std::exp(ratio * static_cast<double>(i));
    if (rate(bw) >= need) {
      if (i == 0) return bw;
      double a = prev;
      double b = bw;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double m = 0.5 * (a + b);
        (rate(m) >= need ? b : a) = m;
      }
      return b;
    }
    prev = bw;
  }
  return kInf;
}

double quotient(const ComplexVector& a, const ComplexMatrix& r, const ComplexVector& w) {
  std::complex<double> num = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) num += std::conj(a[i]) * w[i];
  std::complex<double> den = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      den += std::conj(w[i]) * r(i, j) * w[j];
    }
  }
  return std::norm(num) / den.real();
}

double best_random_beam(const ComplexVector& a, const ComplexMatrix& r, std::size_t samples, RngStream& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  double best = 0.0;
  ComplexVector w(a.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = {n01(rng), n01(rng)};
    w /= w.norm();
    best = std::max(best, quotient(a, r, w));
  }
  return best;
}

double max_quotient(const ComplexVector& a, const ComplexMatrix& r) {
  const ComplexMatrix aa = a * a.adjoint();
  Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> solver(aa, r);
  if (solver.info() != Eigen::Success) {
    throw SingularMatrixError("max_quotient: eigen-solve failed");
  }
  return solver.eigenvalues().maxCoeff();
}

double reference_loss(const std::vector<std::size_t>& architecture, std::span<const double> theta,
                      const Eigen::VectorXd& x, int label) {
  const auto z = forward_all(architecture, layout_of(architecture), theta, x);
  return log_sum_exp(z.back()) - z.back()[label];
}

std::vector<double> finite_difference_gradient(const std::vector<std::size_t>& architecture,
                                               std::vector<double> theta, const Eigen::VectorXd& x, int label,
                                               double step) {
  const Layout lay = layout_of(architecture);
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + step;
    const auto zu = forward_all(architecture, lay, theta, x);
    const double up = log_sum_exp(zu.back()) - zu.back()[label];
    theta[i] = keep - step;
    const auto zd = forward_all(architecture, lay, theta, x);
    const double down = log_sum_exp(zd.back()) - zd.back()[label];
    theta[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

std::vector<std::vector<double>> fedavg_reference(const FederationState& initial, const RoundConfig& config,
                                                  std::uint32_t rounds) {
  const auto& arch = initial.global.architecture();
  const Layout lay = layout_of(arch);
  std::vector<double> global = initial.global.flatten();
  std::vector<std::vector<double>> trajectory;
  std::vector<double> grad(lay.total);

  for (std::uint32_t r = 1; r <= rounds; ++r) {
    auto sel_rng = derive_stream(initial.seed, StreamTag::kSelection, {r});
    const auto selected = federation::select_workers(initial.workers.size(), config.select_fraction, sel_rng);

    double total = 0.0;
    for (const auto id : selected) total += static_cast<double>(initial.workers[id].dataset.size());

    std::vector<double> next(lay.total, 0.0);
    for (const auto id : selected) {
      const LabeledDataset& data = initial.workers[id].dataset;
      auto rng = derive_stream(initial.seed, StreamTag::kTraining, {id, r});
      std::vector<double> theta = global;
      for (std::uint32_t e = 0; e < config.epochs; ++e) {
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
          const std::size_t n = std::min(config.batch_size, order.size() - start);
          batch_gradient(arch, lay, theta, data, std::span(order).subspan(start, n), grad);
          for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= config.learning_rate * grad[i];
        }
      }
      const double weight = static_cast<double>(data.size()) / total;
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += weight * theta[i];
    }
    global = next;
    trajectory.push_back(global);
  }
  return trajectory;
}

}  // namespace feel::oracle
