#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/eval.hpp"

namespace hdrfusion {

RadianceErrorReport radiance_error(const ImageF& est, const ImageF& gt, const Mask& valid) {
  if (!est.same_shape(gt) || !valid.same_shape(gt) || est.channels() != gt.channels())
    throw InvalidInput("radiance_error inputs differ in shape");
  double eg = 0, ee = 0, gg = 0;
  std::size_t count = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      if (!valid(x, y)) continue;
      ++count;
      for (int c = 0; c < gt.channels(); ++c) {
        const double e = est(x, y, c), g = gt(x, y, c);
        eg += e * g;
        ee += e * e;
        gg += g * g;
      }
    }
  if (count == 0) throw InvalidInput("radiance_error mask is empty");
  if (!(ee > 0) || !(gg > 0)) throw InvalidInput("radiance_error inputs are zero on the mask");
  RadianceErrorReport r;
  r.count = count;
  r.scale = eg / ee;
  // |s e - g|^2 = s^2 ee - 2 s eg + gg, expanded to avoid a second pass.
  const double resid = std::max(0.0, r.scale * r.scale * ee - 2 * r.scale * eg + gg);
  r.relative_rms = std::sqrt(resid / gg);
  return r;
}

}  // namespace hdrfusion
