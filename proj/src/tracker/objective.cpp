#include <algorithm>
#include <cmath>
#include <limits>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/parallel.hpp"
#include "linearize.hpp"

namespace hdrfusion {
namespace detail {
namespace {

using Row2 = Eigen::Matrix<double, 1, 2>;
using Row6 = Eigen::Matrix<double, 1, 6>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

struct PixelResidual {
  double r = 0;
  Row2 dr_du = Row2::Zero();
  double a = 0;  // reference value
  double l = 0;  // live value before scaling
};

constexpr double kNccMinEnergy = 1e-6;
constexpr double kNccStep = 0.5;
constexpr double kNccMinResidual = 1e-3;

// Zero-mean NCC between the reference patch on integer pixel (x, y) and the
// live patch centered on (ux, uy). NaN when either patch is flat.
double ncc_score(const TrackingLevel& rl, const TrackingLevel& ll, int x, int y, double ux, double uy,
                 int radius) {
  const int n = (2 * radius + 1) * (2 * radius + 1);
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double a = rl.value(x + dx, y + dy);
      const double b = bilinear(ll.value, ux + dx, uy + dy);
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (!(va > kNccMinEnergy && vb > kNccMinEnergy)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp((sab - sa * sb / n) / std::sqrt(va * vb), -1.0, 1.0);
}

bool reference_patch_valid(const TrackingLevel& rl, int x, int y, int radius) {
  if (x - radius < 0 || y - radius < 0 || x + radius >= rl.value.width() || y + radius >= rl.value.height())
    return false;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (!rl.valid(x + dx, y + dy)) return false;
  return true;
}

bool live_patch_inside(const TrackingLevel& ll, double ux, double uy, double margin) {
  return ux - margin >= 0 && uy - margin >= 0 && ux + margin < ll.value.width() - 1 &&
         uy + margin < ll.value.height() - 1;
}

bool inside_bilinear(const TrackingLevel& ll, const Vec2& u) {
  return u.x() >= 0 && u.y() >= 0 && u.x() < ll.value.width() - 1 && u.y() < ll.value.height() - 1;
}

bool depth_consistent(const TrackingLevel& ll, const Vec2& u, double z, double gate) {
  const int xi = static_cast<int>(std::lround(u.x()));
  const int yi = static_cast<int>(std::lround(u.y()));
  if (!ll.depth.contains(xi, yi)) return false;
  const double d = ll.depth(xi, yi);
  return d > 0 && std::abs(d - z) <= gate;
}

bool pixel_residual(const TrackingLevel& rl, const TrackingLevel& ll, Objective obj, int x, int y,
                    const Vec2& u, const TrackerConfig& cfg, double scale, bool jacobian, bool gated,
                    PixelResidual& out) {
  if (obj == Objective::Ncc) {
    const int r = cfg.ncc_radius;
    if (!reference_patch_valid(rl, x, y, r)) return false;
    if (!live_patch_inside(ll, u.x(), u.y(), r + (jacobian ? kNccStep : 0.0))) return false;
    if (gated && !bilinear_footprint_valid(ll.valid, u.x(), u.y())) return false;
    const double c = ncc_score(rl, ll, x, y, u.x(), u.y(), r);
    if (!std::isfinite(c)) return false;
    out.r = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (jacobian) {
      const double cxp = ncc_score(rl, ll, x, y, u.x() + kNccStep, u.y(), r);
      const double cxm = ncc_score(rl, ll, x, y, u.x() - kNccStep, u.y(), r);
      const double cyp = ncc_score(rl, ll, x, y, u.x(), u.y() + kNccStep, r);
      const double cym = ncc_score(rl, ll, x, y, u.x(), u.y() - kNccStep, r);
      if (!(std::isfinite(cxp) && std::isfinite(cxm) && std::isfinite(cyp) && std::isfinite(cym))) return false;
      const Row2 grad_c((cxp - cxm) / (2 * kNccStep), (cyp - cym) / (2 * kNccStep));
      out.dr_du = -c * grad_c / std::max(out.r, kNccMinResidual);
    }
    return true;
  }

  if (gated ? !bilinear_footprint_valid(ll.valid, u.x(), u.y()) : !inside_bilinear(ll, u)) return false;
  const double a = rl.value(x, y);
  out.a = a;
  if (!jacobian) {
    const double l = bilinear(ll.value, u.x(), u.y());
    out.l = l;
    switch (obj) {
      case Objective::NormRadiance: out.r = (a - l) * bilinear(ll.weight, u.x(), u.y()); break;
      case Objective::CompRadiance: out.r = a - scale * l; break;
      default: out.r = a - l; break;
    }
    return true;
  }
  const BilinearSample l = bilinear_with_gradient(ll.value, u.x(), u.y());
  out.l = l.value;
  const Row2 grad_l(l.dx, l.dy);
  switch (obj) {
    case Objective::NormRadiance: {
      const BilinearSample w = bilinear_with_gradient(ll.weight, u.x(), u.y());
      out.r = (a - l.value) * w.value;
      out.dr_du = -grad_l * w.value + (a - l.value) * Row2(w.dx, w.dy);
      break;
    }
    case Objective::CompRadiance:
      out.r = a - scale * l.value;
      out.dr_du = -scale * grad_l;
      break;
    default:
      out.r = a - l.value;
      out.dr_du = -grad_l;
      break;
  }
  return true;
}

// d r / d twist for a left-multiplied twist (t, w) acting on live point p.
Row6 chain(const Row2& dr_du, const Vec3& p, const CameraModel& cam) {
  const double iz = 1.0 / p.z();
  Mat23 du_dp;
  du_dp << cam.fx * iz, 0, -cam.fx * p.x() * iz * iz, 0, cam.fy * iz, -cam.fy * p.y() * iz * iz;
  Mat36 dp_dxi;
  dp_dxi.leftCols<3>().setIdentity();
  dp_dxi.rightCols<3>() = -skew(p);
  return dr_du * du_dp * dp_dxi;
}

Linearization fold(const Linearization& acc, const Linearization& p) {
  Linearization out = acc;
  out.H += p.H;
  out.g += p.g;
  out.cost_sum += p.cost_sum;
  out.ref_live += p.ref_live;
  out.live_sq += p.live_sq;
  out.count += p.count;
  return out;
}

}  // namespace

Linearization linearize(const TrackingFrame& ref, const TrackingFrame& live, int level, const Pose& pose,
                        const TrackerConfig& cfg, const LinearizeOptions& opt) {
  if (level < 0 || level >= static_cast<int>(ref.levels.size()) ||
      level >= static_cast<int>(live.levels.size()))
    throw InvalidInput("pyramid level out of range");
  if (ref.objective != live.objective) throw InvalidInput("reference and live prepared for different objectives");
  const TrackingLevel& rl = ref.levels[level];
  const TrackingLevel& ll = live.levels[level];
  const CameraModel& cam = rl.camera;
  const Objective obj = ref.objective;
  const int w = rl.value.width();

  // Returns false when the pixel is rejected; otherwise accumulates into acc.
  auto accumulate = [&](int x, int y, bool gated, Linearization& acc) {
    const double d = rl.depth(x, y);
    if (!(d > 0)) return false;
    const Vec3 pr((x - cam.cx) * d / cam.fx, (y - cam.cy) * d / cam.fy, d);
    const Vec3 pl = pose * pr;
    if (!(pl.z() > 1e-6)) return false;
    const Vec2 u(cam.fx * pl.x() / pl.z() + cam.cx, cam.fy * pl.y() / pl.z() + cam.cy);
    if (gated && !depth_consistent(ll, u, pl.z(), cfg.depth_gate)) return false;
    PixelResidual pr_out;
    if (!pixel_residual(rl, ll, obj, x, y, u, cfg, opt.scale, opt.jacobian, gated, pr_out)) return false;
    acc.cost_sum += pr_out.r * pr_out.r;
    acc.ref_live += pr_out.a * pr_out.l;
    acc.live_sq += pr_out.l * pr_out.l;
    acc.count += 1;
    if (opt.jacobian) {
      const Row6 j = chain(pr_out.dr_du, pl, cam);
      acc.H.noalias() += j.transpose() * j;
      acc.g.noalias() += j.transpose() * pr_out.r;
    }
    return true;
  };

  Linearization total;
  if (opt.fixed) {
    for (int idx : *opt.fixed) accumulate(idx % w, idx / w, false, total);
    total.reference = opt.fixed->size();
    return total;
  }

  const int h = rl.value.height();
  std::vector<std::vector<int>> accepted_rows(opt.accepted ? static_cast<std::size_t>(h) : 0);
  total = parallel_reduce(
      0, h, Linearization{},
      [&](int y) {
        Linearization acc;
        for (int x = 0; x < w; ++x) {
          if (!rl.valid(x, y)) continue;
          if (accumulate(x, y, true, acc) && opt.accepted) accepted_rows[y].push_back(y * w + x);
        }
        return acc;
      },
      fold);
  total.reference = ref.reference_valid(level);
  if (opt.accepted) {
    opt.accepted->clear();
    for (const auto& row : accepted_rows) opt.accepted->insert(opt.accepted->end(), row.begin(), row.end());
  }
  return total;
}

}  // namespace detail

ObjectiveValue evaluate_objective(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                  const Pose& pose, const TrackerConfig& cfg, double scale) {
  detail::LinearizeOptions opt;
  opt.jacobian = false;
  opt.scale = scale;
  const detail::Linearization lin = detail::linearize(ref, live, level, pose, cfg, opt);
  ObjectiveValue v{lin.cost(), lin.count, lin.fraction()};
  if (lin.count == 0 || v.valid_fraction < cfg.min_valid_fraction) throw InsufficientOverlap(v.valid_fraction);
  return v;
}

Correspondences collect_correspondences(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                        const Pose& pose, const TrackerConfig& cfg) {
  Correspondences set;
  detail::LinearizeOptions opt;
  opt.jacobian = false;
  opt.accepted = &set.pixels;
  detail::linearize(ref, live, level, pose, cfg, opt);
  return set;
}

CostGradient norm_radiance_cost_gradient(const TrackingFrame& ref, const TrackingFrame& live, int level,
                                         const Pose& pose, const Correspondences& set) {
  if (ref.objective != Objective::NormRadiance) throw InvalidInput("frames not prepared for NORM_RADIANCE");
  if (set.pixels.empty()) throw InvalidInput("empty correspondence set");
  TrackerConfig cfg;
  detail::LinearizeOptions opt;
  opt.fixed = &set.pixels;
  const detail::Linearization lin = detail::linearize(ref, live, level, pose, cfg, opt);
  if (lin.count == 0) throw InsufficientOverlap(0.0);
  const double n = static_cast<double>(lin.count);
  return {lin.cost_sum / n, 2.0 * lin.g / n};
}

}  // namespace hdrfusion
