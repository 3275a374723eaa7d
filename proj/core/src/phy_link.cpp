#include "ccl/phy_link.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <future>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ccl/rng.hpp"
#include "ccl/special_math.hpp"

namespace ccl::phy {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// Thin-QR factor pair with a condition guard on diag(R).
struct ThinQr {
  Eigen::MatrixXcd q;
  Eigen::MatrixXcd r;
};

ThinQr thin_qr_checked(const Eigen::MatrixXcd& h) {
  const Eigen::Index rows = h.rows();
  const Eigen::Index cols = h.cols();
  if (cols < 1 || rows < cols)
    throw std::invalid_argument("pzf: need 1 <= columns <= rows");
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(h);
  ThinQr out;
  out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
  out.r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (Eigen::Index i = 0; i < cols; ++i) {
    const double a = std::abs(out.r(i, i));
    dmin = std::min(dmin, a);
    dmax = std::max(dmax, a);
  }
  if (dmin == 0.0 || dmax / dmin > 1e12)
    throw std::runtime_error("pzf: channel matrix is rank-deficient");
  return out;
}

struct ChunkStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  long n = 0;
};

}  // namespace

double local_average_sir(double r_l, double r_zf, double eta, double lambda) {
  if (!(r_l > 0.0) || !(r_zf > 0.0) || r_l > r_zf)
    throw std::domain_error("local_average_sir: need 0 < r_l <= r_zf");
  if (!(eta > 2.0)) throw std::domain_error("local_average_sir: eta must exceed 2");
  if (!(lambda > 0.0)) throw std::domain_error("local_average_sir: lambda must be positive");
  return std::pow(r_zf, eta - 2.0) / std::pow(r_l, eta) * (eta - 2.0) / (2.0 * kPi * lambda);
}

Eigen::MatrixXcd pzf_filter(const Eigen::MatrixXcd& channel) {
  const ThinQr qr = thin_qr_checked(channel);
  // H (H^H H)^{-1} = Q R^{-H}; then normalize columns.
  Eigen::MatrixXcd pinv =
      qr.q * qr.r.adjoint().triangularView<Eigen::Lower>().solve(
                 Eigen::MatrixXcd::Identity(channel.cols(), channel.cols()));
  for (Eigen::Index c = 0; c < pinv.cols(); ++c) pinv.col(c).normalize();
  return pinv;
}

Eigen::VectorXd pzf_signal_gains(const Eigen::MatrixXcd& channel) {
  const ThinQr qr = thin_qr_checked(channel);
  // Column norms of the unnormalized pseudo-inverse: ||Q R^{-H} e_l|| =
  // ||R^{-H} e_l||, so work on the small triangular factor only.
  const Eigen::MatrixXcd y = qr.r.adjoint().triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXcd::Identity(channel.cols(), channel.cols()));
  Eigen::VectorXd gains(channel.cols());
  for (Eigen::Index c = 0; c < y.cols(); ++c) gains(c) = 1.0 / y.col(c).squaredNorm();
  return gains;
}

McRateResult mc_conditional_rate(const geometry::PPPRealization& phi, int stream, int n_zf,
                                 const ChannelParams& params, long draws, std::uint64_t seed,
                                 int threads) {
  if (stream < 1 || stream > n_zf)
    throw std::invalid_argument("mc_conditional_rate: need 1 <= stream <= n_zf");
  if (n_zf > params.n_antennas)
    throw std::invalid_argument("mc_conditional_rate: n_zf must not exceed n_antennas");
  if (static_cast<long>(phi.distances.size()) < n_zf + 1)
    throw std::invalid_argument("mc_conditional_rate: geometry has too few points");
  if (draws < 1) throw std::invalid_argument("mc_conditional_rate: draws must be >= 1");
  if (threads < 1) threads = 1;

  const double eta = params.pathloss_eta;
  const double gain_scale = params.pathloss_intercept * params.tx_power;
  const double sig_path = gain_scale * std::pow(phi.distances[stream - 1], -eta);
  std::vector<double> interferer_path(phi.distances.size() - n_zf);
  for (std::size_t j = n_zf; j < phi.distances.size(); ++j)
    interferer_path[j - n_zf] = gain_scale * std::pow(phi.distances[j], -eta);

  const int nr = params.n_antennas;
  constexpr long kChunk = 256;
  const long n_chunks = (draws + kChunk - 1) / kChunk;
  std::vector<ChunkStats> stats(n_chunks);

  auto run_chunk = [&](long chunk) {
    std::mt19937_64 gen(rng::derive_stream(seed, static_cast<std::uint64_t>(chunk)));
    const long begin = chunk * kChunk;
    const long count = std::min(kChunk, draws - begin);
    ChunkStats s;
    Eigen::MatrixXcd h(nr, n_zf);
    for (long it = 0; it < count; ++it) {
      for (int c = 0; c < n_zf; ++c) {
        for (int r = 0; r < nr; ++r) {
          double x;
          double y;
          rng::normal_pair(gen, x, y);
          h(r, c) = std::complex<double>(x * M_SQRT1_2, y * M_SQRT1_2);
        }
      }
      const double sig = sig_path * pzf_signal_gains(h)(stream - 1);
      // Interference through the unit-norm filter column: the projected fading
      // of each un-nulled node is again unit complex Gaussian, so its power is
      // a fresh Exp(1) draw.
      double interf = 0.0;
      for (const double path : interferer_path)
        interf += path * (-std::log(rng::uniform01_open(gen)));
      const double sir = sig / (interf + params.noise_n0);
      const double rate = std::log2(1.0 + sir);
      s.sum += rate;
      s.sum_sq += rate * rate;
      ++s.n;
    }
    stats[chunk] = s;
  };

  if (threads == 1) {
    for (long chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::vector<std::future<void>> pool;
    std::atomic<long> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const long chunk = next.fetch_add(1);
          if (chunk >= n_chunks) return;
          run_chunk(chunk);
        }
      }));
    }
    for (auto& f : pool) f.get();
  }

  // Fixed-order combination keeps the result independent of thread count.
  double sum = 0.0;
  double sum_sq = 0.0;
  long n = 0;
  for (const ChunkStats& s : stats) {
    sum += s.sum;
    sum_sq += s.sum_sq;
    n += s.n;
  }
  McRateResult out;
  out.draws = n;
  out.rate_bits = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / n - out.rate_bits * out.rate_bits);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

double threshold_r_l2(double rate_bits, double eta, double lambda, int dof) {
  if (!(rate_bits > 0.0)) throw std::domain_error("threshold_r_l2: rate must be positive");
  if (!(eta > 2.0)) throw std::domain_error("threshold_r_l2: eta must exceed 2");
  if (!(lambda > 0.0)) throw std::domain_error("threshold_r_l2: lambda must be positive");
  const double sir = specfun::qlb_rate_inverse(dof, rate_bits);
  return std::sqrt((eta - 2.0) / (2.0 * kPi * lambda * sir));
}

double threshold_r_l1(double rate_bits, double v, double eta, double lambda, int dof) {
  if (!(rate_bits > 0.0)) throw std::domain_error("threshold_r_l1: rate must be positive");
  if (!(v > 0.0)) throw std::domain_error("threshold_r_l1: v must be positive");
  if (!(eta > 2.0)) throw std::domain_error("threshold_r_l1: eta must exceed 2");
  if (!(lambda > 0.0)) throw std::domain_error("threshold_r_l1: lambda must be positive");
  const double sir = specfun::qlb_rate_inverse(dof, rate_bits);
  return std::pow((eta - 2.0) / (2.0 * kPi * lambda) * std::pow(v, eta - 2.0) / sir, 1.0 / eta);
}

double min_mc_window_radius(double r_inner, double eta, double tail_fraction) {
  if (!(r_inner > 0.0)) throw std::domain_error("min_mc_window_radius: r_inner must be positive");
  if (!(eta > 2.0)) throw std::domain_error("min_mc_window_radius: eta must exceed 2");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw std::domain_error("min_mc_window_radius: tail_fraction must lie in (0,1)");
  // Mean interference beyond R relative to the in-window mean from r_inner:
  // (R/r)^{2-eta} / (1 - (R/r)^{2-eta}) <= f  =>  (R/r)^{eta-2} >= 1 + 1/f.
  return r_inner * std::pow(1.0 + 1.0 / tail_fraction, 1.0 / (eta - 2.0));
}

}  // namespace ccl::phy
