#include "alseg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alseg/data/preprocess.hpp"

namespace alseg::eval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename GridT>
void check_shapes(const GridT& a, const GridT& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("metric: mask shape mismatch");
}

double dsc_from_counts(std::size_t inter, std::size_t na, std::size_t nb) {
  if (na + nb == 0) return 100.0;
  return 200.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

// 1D lower envelope of parabolas (p - q)^2 + f(q) over sample positions
// q = i * s; evaluated at the same positions. Infinite samples never enter
// the envelope.
void edt_1d(const double* f, double* out, std::size_t n, double s,
            std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (std::size_t qi = 0; qi < n; ++qi) {
    if (f[qi] == kInf) continue;
    const double q = qi * s;
    double inter = 0.0;
    while (k >= 0) {
      const double p = v[k] * s;
      inter = ((f[qi] + q * q) - (f[v[k]] + p * p)) / (2.0 * q - 2.0 * p);
      if (inter <= z[k])
        --k;
      else
        break;
    }
    if (k < 0) {
      k = 0;
      v[0] = static_cast<int>(qi);
      z[0] = -kInf;
    } else {
      ++k;
      v[k] = static_cast<int>(qi);
      z[k] = inter;
    }
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = kInf;
    return;
  }
  int j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = i * s;
    while (z[j + 1] < p) ++j;
    const double d = p - v[j] * s;
    out[i] = d * d + f[v[j]];
  }
}

// Applies edt_1d along one axis of a flat array.
void edt_axis(std::vector<double>& g, std::size_t n_lines, std::size_t len,
              std::size_t stride,
              const std::function<std::size_t(std::size_t)>& line_base,
              double spacing) {
  std::vector<double> f(len), out(len);
  std::vector<int> v;
  std::vector<double> z;
  for (std::size_t l = 0; l < n_lines; ++l) {
    const std::size_t base = line_base(l);
    for (std::size_t i = 0; i < len; ++i) f[i] = g[base + i * stride];
    edt_1d(f.data(), out.data(), len, spacing, v, z);
    for (std::size_t i = 0; i < len; ++i) g[base + i * stride] = out[i];
  }
}

}  // namespace

std::vector<double> squared_edt_2d(const std::vector<char>& set, std::size_t h,
                                   std::size_t w,
                                   std::array<double, 2> spacing) {
  std::vector<double> g(h * w);
  for (std::size_t i = 0; i < h * w; ++i) g[i] = set[i] ? 0.0 : kInf;
  // Along x then along y.
  edt_axis(g, h, w, 1, [w](std::size_t y) { return y * w; }, spacing[1]);
  edt_axis(g, w, h, w, [](std::size_t x) { return x; }, spacing[0]);
  return g;
}

std::vector<double> squared_edt_3d(const std::vector<char>& set, std::size_t d,
                                   std::size_t h, std::size_t w,
                                   std::array<double, 3> spacing) {
  std::vector<double> g(d * h * w);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = set[i] ? 0.0 : kInf;
  edt_axis(g, d * h, w, 1, [w](std::size_t l) { return l * w; }, spacing[2]);
  edt_axis(g, d * w, h, w,
           [h, w](std::size_t l) {
             const std::size_t z = l / w, x = l % w;
             return z * h * w + x;
           },
           spacing[1]);
  edt_axis(g, h * w, d, h * w, [](std::size_t l) { return l; }, spacing[0]);
  return g;
}

double dsc(const Grid2D<ClassId>& pred, const Grid2D<ClassId>& target,
           int class_id) {
  check_shapes(pred, target);
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const bool a = pred.v[i] == class_id, b = target.v[i] == class_id;
    inter += a && b;
    na += a;
    nb += b;
  }
  return dsc_from_counts(inter, na, nb);
}

double dsc(const Grid3D<ClassId>& pred, const Grid3D<ClassId>& target,
           int class_id) {
  check_shapes(pred, target);
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const bool a = pred.v[i] == class_id, b = target.v[i] == class_id;
    inter += a && b;
    na += a;
    nb += b;
  }
  return dsc_from_counts(inter, na, nb);
}

namespace {

// Collects distances from boundary voxels of `from` to the nearest set
// voxel of `to` (via its EDT).
void boundary_distances_2d(const std::vector<char>& from,
                           const std::vector<double>& to_edt, std::size_t h,
                           std::size_t w, std::vector<double>& out) {
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (!from[i]) continue;
      const bool boundary = (y == 0 || !from[i - w]) || (y + 1 == h || !from[i + w]) ||
                            (x == 0 || !from[i - 1]) || (x + 1 == w || !from[i + 1]);
      if (boundary) out.push_back(std::sqrt(to_edt[i]));
    }
}

void boundary_distances_3d(const std::vector<char>& from,
                           const std::vector<double>& to_edt, std::size_t d,
                           std::size_t h, std::size_t w,
                           std::vector<double>& out) {
  const std::size_t hw = h * w;
  for (std::size_t z = 0; z < d; ++z)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = (z * h + y) * w + x;
        if (!from[i]) continue;
        const bool boundary =
            (z == 0 || !from[i - hw]) || (z + 1 == d || !from[i + hw]) ||
            (y == 0 || !from[i - w]) || (y + 1 == h || !from[i + w]) ||
            (x == 0 || !from[i - 1]) || (x + 1 == w || !from[i + 1]);
        if (boundary) out.push_back(std::sqrt(to_edt[i]));
      }
}

std::optional<double> hd95_impl(const std::vector<char>& a,
                                const std::vector<char>& b,
                                const std::function<std::vector<double>(
                                    const std::vector<char>&)>& edt,
                                const std::function<void(
                                    const std::vector<char>&,
                                    const std::vector<double>&,
                                    std::vector<double>&)>& boundary_dists) {
  const bool a_empty = std::find(a.begin(), a.end(), char(1)) == a.end();
  const bool b_empty = std::find(b.begin(), b.end(), char(1)) == b.end();
  if (a_empty || b_empty) return std::nullopt;

  const auto edt_a = edt(a);
  const auto edt_b = edt(b);
  std::vector<double> da, db;
  boundary_dists(a, edt_b, da);
  boundary_dists(b, edt_a, db);
  const double pa = data::percentile_linear(std::move(da), 95.0);
  const double pb = data::percentile_linear(std::move(db), 95.0);
  return std::max(pa, pb);
}

std::vector<char> class_mask(const std::vector<ClassId>& m, int class_id) {
  std::vector<char> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] == class_id;
  return out;
}

}  // namespace

std::optional<double> hd95(const Grid2D<ClassId>& pred,
                           const Grid2D<ClassId>& target, int class_id,
                           std::array<double, 2> spacing) {
  check_shapes(pred, target);
  if (!(spacing[0] > 0.0 && spacing[1] > 0.0))
    throw std::invalid_argument("hd95: non-positive spacing");
  const auto a = class_mask(pred.v, class_id);
  const auto b = class_mask(target.v, class_id);
  const std::size_t h = pred.h, w = pred.w;
  return hd95_impl(
      a, b,
      [&](const std::vector<char>& s) { return squared_edt_2d(s, h, w, spacing); },
      [&](const std::vector<char>& f, const std::vector<double>& e,
          std::vector<double>& out) { boundary_distances_2d(f, e, h, w, out); });
}

std::optional<double> hd95(const Grid3D<ClassId>& pred,
                           const Grid3D<ClassId>& target, int class_id,
                           std::array<double, 3> spacing) {
  check_shapes(pred, target);
  if (!(spacing[0] > 0.0 && spacing[1] > 0.0 && spacing[2] > 0.0))
    throw std::invalid_argument("hd95: non-positive spacing");
  const auto a = class_mask(pred.v, class_id);
  const auto b = class_mask(target.v, class_id);
  const std::size_t d = pred.d, h = pred.h, w = pred.w;
  return hd95_impl(
      a, b,
      [&](const std::vector<char>& s) { return squared_edt_3d(s, d, h, w, spacing); },
      [&](const std::vector<char>& f, const std::vector<double>& e,
          std::vector<double>& out) { boundary_distances_3d(f, e, d, h, w, out); });
}

namespace {

struct Accum {
  double sum = 0.0;
  int n = 0;
  int undefined = 0;
  void add(std::optional<double> v) {
    if (v) {
      sum += *v;
      ++n;
    } else {
      ++undefined;
    }
  }
  void add(double v) {
    sum += v;
    ++n;
  }
};

MetricRecord finalize(MetricRecord::Scope scope, MetricRecord::Kind kind,
                      const std::map<int, Accum>& acc) {
  MetricRecord r;
  r.scope = scope;
  r.kind = kind;
  double total = 0.0;
  int classes = 0;
  for (const auto& [c, a] : acc) {
    if (a.undefined > 0) r.undefined_count[c] = a.undefined;
    if (a.n > 0) {
      const double mean = a.sum / a.n;
      r.per_class[c] = mean;
      total += mean;
      ++classes;
    }
  }
  r.mean_non_background =
      classes > 0 ? total / classes : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace

EvalSummary evaluate_model(const SlicePredictor& predict,
                           const data::DatasetSplit& dataset) {
  if (dataset.test.empty())
    throw std::invalid_argument("evaluate_model: empty test split");

  std::map<int, Accum> d2, h2, d3, h3;

  // 2D pass, plus predicted masks grouped by volume for the 3D pass.
  std::map<std::string, std::vector<const data::SliceSample*>> by_volume;
  std::map<std::string, std::vector<Grid2D<ClassId>>> preds_by_volume;
  for (const auto& s : dataset.test) by_volume[s.volume_id].push_back(&s);
  for (auto& [vid, slices] : by_volume)
    std::sort(slices.begin(), slices.end(),
              [](const data::SliceSample* a, const data::SliceSample* b) {
                return a->slice_index < b->slice_index;
              });

  for (const auto& [vid, slices] : by_volume) {
    for (const auto* s : slices) {
      Grid2D<ClassId> pred = predict(*s);
      if (!pred.same_shape(s->mask))
        throw std::runtime_error("evaluate_model: predictor returned wrong shape");
      for (int c = 1; c < dataset.class_count; ++c) {
        d2[c].add(dsc(pred, s->mask, c));
        h2[c].add(hd95(pred, s->mask, c, s->pixel_spacing));
      }
      preds_by_volume[vid].push_back(std::move(pred));
    }
  }

  // 3D pass on stacked volumes.
  for (const auto& [vid, slices] : by_volume) {
    const auto& preds = preds_by_volume[vid];
    const std::size_t d = slices.size(), h = slices[0]->mask.h, w = slices[0]->mask.w;
    Grid3D<ClassId> pv(d, h, w), tv(d, h, w);
    for (std::size_t z = 0; z < d; ++z) {
      std::copy(preds[z].v.begin(), preds[z].v.end(), pv.v.begin() + z * h * w);
      std::copy(slices[z]->mask.v.begin(), slices[z]->mask.v.end(),
                tv.v.begin() + z * h * w);
    }
    const auto it = dataset.slice_spacing.find(vid);
    const double sz = it != dataset.slice_spacing.end() ? it->second : 1.0;
    const std::array<double, 3> spacing{sz, slices[0]->pixel_spacing[0],
                                        slices[0]->pixel_spacing[1]};
    for (int c = 1; c < dataset.class_count; ++c) {
      d3[c].add(dsc(pv, tv, c));
      h3[c].add(hd95(pv, tv, c, spacing));
    }
  }

  EvalSummary out;
  out.dsc_2d = finalize(MetricRecord::Scope::slices_2d, MetricRecord::Kind::dsc, d2);
  out.hd95_2d = finalize(MetricRecord::Scope::slices_2d, MetricRecord::Kind::hd95, h2);
  out.dsc_3d = finalize(MetricRecord::Scope::volumes_3d, MetricRecord::Kind::dsc, d3);
  out.hd95_3d = finalize(MetricRecord::Scope::volumes_3d, MetricRecord::Kind::hd95, h3);
  return out;
}

}  // namespace alseg::eval
