#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/radiometric.hpp"

namespace hdrfusion {
namespace {

double hat(int z) { return z <= 127 ? z + 1.0 : 256.0 - z; }

// Pool-adjacent-violators: least-squares nondecreasing fit with unit weights.
void isotonic(LevelTable& g) {
  std::vector<double> value;
  std::vector<int> count;
  for (double v : g) {
    value.push_back(v);
    count.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] > value.back()) {
      const std::size_t n = value.size();
      const double merged =
          (value[n - 2] * count[n - 2] + value[n - 1] * count[n - 1]) / (count[n - 2] + count[n - 1]);
      count[n - 2] += count[n - 1];
      value[n - 2] = merged;
      value.pop_back();
      count.pop_back();
    }
  }
  int i = 0;
  for (std::size_t b = 0; b < value.size(); ++b)
    for (int k = 0; k < count[b]; ++k) g[i++] = value[b];
}

LevelTable solve_channel(std::span<const LdrExposure> stack, const std::vector<std::pair<int, int>>& sites,
                         int c, double lambda) {
  // Drop sites that never produce a usable sample; their log radiance would
  // be unconstrained.
  std::vector<std::pair<int, int>> used;
  for (const auto& [x, y] : sites) {
    bool any = false;
    for (const LdrExposure& e : stack) {
      const int z = e.rgb(x, y, c);
      any = any || (z > 0 && z < 255);
    }
    if (any) used.emplace_back(x, y);
  }
  if (used.empty()) throw CalibrationError("all calibration samples are saturated");

  const int n_sites = static_cast<int>(used.size());
  const int n_unknowns = kLevels + n_sites;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  int row = 0;
  for (int i = 0; i < n_sites; ++i)
    for (const LdrExposure& e : stack) {
      const int z = e.rgb(used[i].first, used[i].second, c);
      if (z == 0 || z == 255) continue;
      const double w = hat(z);
      trip.emplace_back(row, z, w);
      trip.emplace_back(row, kLevels + i, -w);
      rhs.push_back(w * std::log(e.exposure_ms));
      ++row;
    }
  const double sl = std::sqrt(lambda);
  for (int z = 1; z < kLevels - 1; ++z) {
    const double w = sl * hat(z);
    trip.emplace_back(row, z - 1, w);
    trip.emplace_back(row, z, -2.0 * w);
    trip.emplace_back(row, z + 1, w);
    rhs.push_back(0.0);
    ++row;
  }
  trip.emplace_back(row, 128, 1.0);
  rhs.push_back(0.0);
  ++row;

  Eigen::SparseMatrix<double> a(row, n_unknowns);
  a.setFromTriplets(trip.begin(), trip.end());
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), row);
  const Eigen::SparseMatrix<double> ata = a.transpose() * a;
  const Eigen::VectorXd atb = a.transpose() * b;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(ata);
  if (solver.info() != Eigen::Success) throw CalibrationError("response system is singular");
  const Eigen::VectorXd d = solver.vectorD();
  if (!(d.minCoeff() > 1e-12 * std::max(1.0, d.maxCoeff())))
    throw CalibrationError("response system is singular");
  const Eigen::VectorXd sol = solver.solve(atb);
  if (solver.info() != Eigen::Success || !sol.allFinite())
    throw CalibrationError("response system is singular");

  LevelTable g{};
  for (int z = 0; z < kLevels; ++z) g[z] = sol[z];
  return g;
}

}  // namespace

ResponseCurve estimate_crf(std::span<const LdrExposure> stack, double smoothness_lambda) {
  if (stack.size() < 3) throw CalibrationError("insufficient exposures (need at least 3)");
  if (!(smoothness_lambda > 0)) throw InvalidInput("smoothness lambda must be positive");
  const ImageU8& first = stack.front().rgb;
  if (first.channels() != 3 || first.empty()) throw InvalidInput("calibration images must be RGB");
  for (const LdrExposure& e : stack) {
    if (!e.rgb.same_shape(first)) throw InvalidInput("calibration images differ in size");
    if (!(e.exposure_ms > 0)) throw InvalidInput("non-positive calibration exposure");
  }

  // Uniform grid of kCrfSampleSites sites, aspect matched to the image.
  const int w = first.width(), h = first.height();
  const double aspect = static_cast<double>(w) / h;
  const int nx = std::max(1, static_cast<int>(std::lround(std::sqrt(kCrfSampleSites * aspect))));
  const int ny = std::max(1, (kCrfSampleSites + nx - 1) / nx);
  std::vector<std::pair<int, int>> sites;
  for (int j = 0; j < ny && static_cast<int>(sites.size()) < kCrfSampleSites; ++j)
    for (int i = 0; i < nx && static_cast<int>(sites.size()) < kCrfSampleSites; ++i)
      sites.emplace_back(static_cast<int>((i + 0.5) * w / nx), static_cast<int>((j + 0.5) * h / ny));

  std::array<LevelTable, 3> inv{}, der{};
  for (int c = 0; c < 3; ++c) {
    LevelTable g = solve_channel(stack, sites, c, smoothness_lambda);
    isotonic(g);
    for (int z = 1; z < kLevels; ++z) g[z] = std::max(g[z], g[z - 1] + 1e-6);
    const double g128 = g[128];
    for (int z = 0; z < kLevels; ++z) inv[c][z] = std::exp(g[z] - g128);

    der[c][0] = 1.0 / (inv[c][1] - inv[c][0]);
    for (int z = 1; z < kLevels - 1; ++z) der[c][z] = 2.0 / (inv[c][z + 1] - inv[c][z - 1]);
    der[c][kLevels - 1] = 0.0;
  }
  return ResponseCurve(inv, der);
}

NoiseModel estimate_noise(std::span<const ImageU8> stack, const ResponseCurve& curve) {
  if (stack.size() < 10) throw CalibrationError("insufficient frames for noise estimation (need 10)");
  const ImageU8& first = stack.front();
  if (first.channels() != 3) throw InvalidInput("noise frames must be RGB");
  for (const ImageU8& f : stack)
    if (!f.same_shape(first)) throw InvalidInput("noise frames differ in size");

  const double n = static_cast<double>(stack.size());
  NoiseModel out;
  for (int c = 0; c < 3; ++c) {
    // level -> (sum of variances, count)
    std::map<int, std::pair<double, int>> bins;
    for (int y = 0; y < first.height(); ++y)
      for (int x = 0; x < first.width(); ++x) {
        double s = 0, s2 = 0;
        bool clipped = false;
        for (const ImageU8& f : stack) {
          const int z = f(x, y, c);
          clipped = clipped || z == 0 || z == 255;
          s += z;
          s2 += static_cast<double>(z) * z;
        }
        if (clipped) continue;
        const double mean = s / n;
        const double var = std::max(0.0, (s2 - s * mean) / (n - 1));
        auto& bin = bins[static_cast<int>(std::lround(mean))];
        bin.first += var;
        bin.second += 1;
      }

    struct Obs {
      double r, var_r, count;
    };
    std::vector<Obs> obs;
    for (const auto& [level, bin] : bins) {
      const double df = curve.derivative(c, level);
      if (!(df > 0)) continue;
      // Sheppard's correction for 8-bit quantization.
      const double var_i = std::max(0.0, bin.first / bin.second - 1.0 / 12.0);
      obs.push_back({curve.inverse(c, level), var_i / (df * df), static_cast<double>(bin.second)});
    }
    if (obs.size() < 16) throw CalibrationError("insufficient distinct intensity levels for noise fit");

    // var_R = R a + b, weighted least squares; second pass reweights by the
    // inverse squared prediction.
    double a = 0, b = 0;
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
      Eigen::Vector2d v = Eigen::Vector2d::Zero();
      for (const Obs& o : obs) {
        double wgt = o.count;
        if (pass == 1) {
          const double pred = std::max(a * o.r + b, 1e-12);
          wgt /= pred * pred;
        }
        const Eigen::Vector2d phi(o.r, 1.0);
        m += wgt * phi * phi.transpose();
        v += wgt * o.var_r * phi;
      }
      const Eigen::Vector2d sol = m.ldlt().solve(v);
      a = std::max(0.0, sol[0]);
      b = std::max(0.0, sol[1]);
    }
    out.sigma_s[c] = std::sqrt(a);
    out.sigma_c[c] = std::sqrt(b);
  }
  out.update_normalizer(curve);
  return out;
}

}  // namespace hdrfusion
