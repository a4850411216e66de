#include "marknav/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "marknav/kernels.hpp"
#include "marknav/mapping.hpp"

namespace marknav::eval {

namespace {

void check_nonempty(const PointSet2D& s, const char* name) {
  if (s.size() == 0) fail(Errc::degenerate_input, std::string(name) + " point set is empty");
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i]))
      fail(Errc::degenerate_input, std::string(name) + " contains non-finite points");
}

}  // namespace

NnIndex::NnIndex(const PointSet2D& points, double bucket_size) {
  double min_x = points.xs[0], max_x = points.xs[0];
  double min_y = points.ys[0], max_y = points.ys[0];
  for (std::size_t i = 0; i < points.size(); ++i) {
    min_x = std::min(min_x, points.xs[i]);
    max_x = std::max(max_x, points.xs[i]);
    min_y = std::min(min_y, points.ys[i]);
    max_y = std::max(max_y, points.ys[i]);
  }
  if (bucket_size <= 0) {
    const double extent = std::max(max_x - min_x, max_y - min_y);
    bucket_size = std::max(extent / std::max(1.0, std::sqrt(static_cast<double>(points.size()))),
                           1e-9);
  }
  inv_bucket_ = 1.0 / bucket_size;
  bx0_ = static_cast<long long>(std::floor(min_x * inv_bucket_));
  by0_ = static_cast<long long>(std::floor(min_y * inv_bucket_));
  nbx_ = static_cast<int>(std::floor(max_x * inv_bucket_) - bx0_) + 1;
  nby_ = static_cast<int>(std::floor(max_y * inv_bucket_) - by0_) + 1;
  buckets_.resize(static_cast<std::size_t>(nbx_) * nby_);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const long long bx = static_cast<long long>(std::floor(points.xs[i] * inv_bucket_));
    const long long by = static_cast<long long>(std::floor(points.ys[i] * inv_bucket_));
    Bucket& b = buckets_[bucket_of(bx, by)];
    b.xs.push_back(points.xs[i]);
    b.ys.push_back(points.ys[i]);
    b.ids.push_back(i);
  }
}

std::size_t NnIndex::bucket_of(long long bx, long long by) const {
  return static_cast<std::size_t>(by - by0_) * nbx_ + static_cast<std::size_t>(bx - bx0_);
}

NnIndex::Hit NnIndex::nearest(double qx, double qy) const {
  const double bucket = 1.0 / inv_bucket_;
  long long qbx = static_cast<long long>(std::floor(qx * inv_bucket_));
  long long qby = static_cast<long long>(std::floor(qy * inv_bucket_));
  qbx = std::clamp(qbx, bx0_, bx0_ + nbx_ - 1);
  qby = std::clamp(qby, by0_, by0_ + nby_ - 1);

  Hit best{std::numeric_limits<double>::infinity(), 0};
  bool found = false;
  const int max_ring = std::max(nbx_, nby_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Conservative lower bound on distances reachable from this ring.
    if (found) {
      const double ring_min = (ring - 1) * bucket;
      if (ring_min > 0 && ring_min * ring_min > best.sqdist) break;
    }
    for (long long by = qby - ring; by <= qby + ring; ++by) {
      if (by < by0_ || by >= by0_ + nby_) continue;
      for (long long bx = qbx - ring; bx <= qbx + ring; ++bx) {
        if (bx < bx0_ || bx >= bx0_ + nbx_) continue;
        if (std::max(std::llabs(bx - qbx), std::llabs(by - qby)) != ring) continue;
        const Bucket& b = buckets_[bucket_of(bx, by)];
        if (b.xs.empty()) continue;
        const kern::MinResult r = kern::min_sqdist(qx, qy, b.xs.data(), b.ys.data(), b.xs.size());
        const std::size_t orig = b.ids[r.index];
        if (!found || r.sqdist < best.sqdist ||
            (r.sqdist == best.sqdist && orig < best.index)) {
          best = {r.sqdist, orig};
          found = true;
        }
      }
    }
  }
  return best;
}

PointSet2D extract_obstacle_points(const grid::OccupancyGrid& g, int occupied_threshold) {
  const grid::BinaryMap thinned = map::binarize_and_thin(g, occupied_threshold);
  PointSet2D out;
  for (int y = 0; y < thinned.height; ++y)
    for (int x = 0; x < thinned.width; ++x)
      if (thinned.at(x, y)) out.push(x, y);
  if (out.size() == 0) fail(Errc::degenerate_input, "grid has no obstacle cells");
  return out;
}

namespace {

struct RigidFit {
  double c = 1.0, s = 0.0, tx = 0.0, ty = 0.0;
  bool degenerate = false;
};

// Closed-form least-squares rigid transform for paired points.
RigidFit fit_rigid(const std::vector<double>& sx, const std::vector<double>& sy,
                   const std::vector<double>& tx, const std::vector<double>& ty) {
  const double n = static_cast<double>(sx.size());
  double msx = 0, msy = 0, mtx = 0, mty = 0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    msx += sx[i];
    msy += sy[i];
    mtx += tx[i];
    mty += ty[i];
  }
  msx /= n;
  msy /= n;
  mtx /= n;
  mty /= n;
  double dot = 0, cross = 0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    const double ax = sx[i] - msx, ay = sy[i] - msy;
    const double bx = tx[i] - mtx, by = ty[i] - mty;
    dot += ax * bx + ay * by;
    cross += ax * by - ay * bx;
  }
  RigidFit f;
  if (std::hypot(dot, cross) < 1e-12) {
    f.degenerate = true;
    f.tx = mtx - msx;
    f.ty = mty - msy;
    return f;
  }
  const double theta = std::atan2(cross, dot);
  f.c = std::cos(theta);
  f.s = std::sin(theta);
  f.tx = mtx - (f.c * msx - f.s * msy);
  f.ty = mty - (f.s * msx + f.c * msy);
  return f;
}

bool collinear(const PointSet2D& p) {
  const double n = static_cast<double>(p.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mx += p.xs[i];
    my += p.ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ax = p.xs[i] - mx, ay = p.ys[i] - my;
    sxx += ax * ax;
    syy += ay * ay;
    sxy += ax * ay;
  }
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  if (tr <= 1e-12) return true;
  // Smaller eigenvalue of the covariance relative to the larger one.
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lam_min = tr / 2.0 - disc;
  const double lam_max = tr / 2.0 + disc;
  return lam_min / lam_max < 1e-9;
}

}  // namespace

IcpResult icp_align(const PointSet2D& source, const PointSet2D& target, int max_iter,
                    double tol) {
  IcpResult best;
  if (source.size() < 3 || target.size() < 3 || collinear(source) || collinear(target)) {
    best.degenerate = true;
    return best;
  }
  check_nonempty(source, "source");
  check_nonempty(target, "target");
  const NnIndex index(target);

  // Fixed multi-start over initial rotations about the source centroid.
  double msx = 0, msy = 0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    msx += source.xs[i];
    msy += source.ys[i];
  }
  msx /= static_cast<double>(source.size());
  msy /= static_cast<double>(source.size());
  static const double kStartsDeg[] = {0, 15, -15, 30, -30, 45, -45};

  bool have_best = false;
  for (const double start_deg : kStartsDeg) {
    const double a = geo::deg2rad(start_deg);
    double c = std::cos(a), s = std::sin(a);
    double tx = msx - (c * msx - s * msy);
    double ty = msy - (s * msx + c * msy);

    std::vector<double> cx(source.size()), cy(source.size());
    std::vector<double> nx(source.size()), ny(source.size());
    double prev_res = std::numeric_limits<double>::infinity();
    double res = prev_res;
    int it = 0;
    for (it = 0; it < max_iter; ++it) {
      double sum_sq = 0;
      for (std::size_t i = 0; i < source.size(); ++i) {
        cx[i] = c * source.xs[i] - s * source.ys[i] + tx;
        cy[i] = s * source.xs[i] + c * source.ys[i] + ty;
        const NnIndex::Hit hit = index.nearest(cx[i], cy[i]);
        nx[i] = target.xs[hit.index];
        ny[i] = target.ys[hit.index];
        sum_sq += hit.sqdist;
      }
      res = std::sqrt(sum_sq / static_cast<double>(source.size()));
      if (std::abs(prev_res - res) < tol) break;
      prev_res = res;
      const RigidFit f = fit_rigid(cx, cy, nx, ny);
      // Compose the incremental fit with the accumulated transform.
      const double c2 = f.c * c - f.s * s;
      const double s2 = f.s * c + f.c * s;
      const double tx2 = f.c * tx - f.s * ty + f.tx;
      const double ty2 = f.s * tx + f.c * ty + f.ty;
      c = c2;
      s = s2;
      tx = tx2;
      ty = ty2;
    }
    if (!have_best || res < best.residual) {
      have_best = true;
      best.residual = res;
      best.iterations = it;
      geo::Transform2D t;
      t.at(0, 0) = c;
      t.at(0, 1) = -s;
      t.at(0, 2) = tx;
      t.at(1, 0) = s;
      t.at(1, 1) = c;
      t.at(1, 2) = ty;
      best.transform = t;
    }
  }
  return best;
}

namespace {

std::vector<double> nn_distances(const PointSet2D& source, const PointSet2D& target) {
  check_nonempty(source, "source");
  check_nonempty(target, "target");
  const NnIndex index(target);
  std::vector<double> d(source.size());
  for (std::size_t i = 0; i < source.size(); ++i)
    d[i] = std::sqrt(index.nearest(source.xs[i], source.ys[i]).sqdist);
  // Sorted aggregation: point order cannot perturb the sum.
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

double adnn(const PointSet2D& source, const PointSet2D& target) {
  const std::vector<double> d = nn_distances(source, target);
  double sum = 0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double rmse(const PointSet2D& source, const PointSet2D& target) {
  std::vector<double> d = nn_distances(source, target);
  for (double& v : d) v *= v;
  std::sort(d.begin(), d.end());
  double sum = 0;
  for (double v : d) sum += v;
  return std::sqrt(sum / static_cast<double>(d.size()));
}

double adnn_symmetric(const PointSet2D& a, const PointSet2D& b) {
  return 0.5 * (adnn(a, b) + adnn(b, a));
}

double ate(const std::vector<TimedPoint>& estimated, const std::vector<TimedPoint>& ground_truth,
           const AteOptions& opt) {
  if (estimated.empty() || ground_truth.empty())
    fail(Errc::degenerate_input, "trajectories must be non-empty");
  // Nearest-timestamp association (ground truth assumed time-sorted).
  std::vector<double> ex, ey, gx, gy;
  for (const TimedPoint& e : estimated) {
    auto it = std::lower_bound(ground_truth.begin(), ground_truth.end(), e.t,
                               [](const TimedPoint& p, double t) { return p.t < t; });
    const TimedPoint* cand = nullptr;
    if (it != ground_truth.end()) cand = &*it;
    if (it != ground_truth.begin()) {
      const TimedPoint* before = &*(it - 1);
      if (!cand || std::abs(before->t - e.t) <= std::abs(cand->t - e.t)) cand = before;
    }
    if (!cand || std::abs(cand->t - e.t) > opt.max_gap_s) continue;
    ex.push_back(e.x);
    ey.push_back(e.y);
    gx.push_back(cand->x);
    gy.push_back(cand->y);
  }
  if (ex.empty()) fail(Errc::degenerate_input, "no associable timestamps within the gap limit");

  double c = 1, s = 0, tx = 0, ty = 0;
  if (opt.align && ex.size() >= 2) {
    const RigidFit f = fit_rigid(ex, ey, gx, gy);
    if (!f.degenerate) {
      c = f.c;
      s = f.s;
    }
    tx = f.tx;
    ty = f.ty;
  }
  std::vector<double> sq(ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const double ax = c * ex[i] - s * ey[i] + tx;
    const double ay = s * ex[i] + c * ey[i] + ty;
    const double dx = ax - gx[i], dy = ay - gy[i];
    sq[i] = dx * dx + dy * dy;
  }
  std::sort(sq.begin(), sq.end());
  double sum = 0;
  for (double v : sq) sum += v;
  return std::sqrt(sum / static_cast<double>(sq.size()));
}

EvalReport evaluate_maps(const grid::OccupancyGrid& evaluated, const grid::OccupancyGrid& truth,
                         int occupied_threshold) {
  const auto t0 = std::chrono::steady_clock::now();
  const PointSet2D src = extract_obstacle_points(evaluated, occupied_threshold);
  const PointSet2D tgt = extract_obstacle_points(truth, occupied_threshold);

  EvalReport rep;
  const IcpResult icp = icp_align(src, tgt);
  rep.icp_iterations = icp.iterations;
  rep.icp_residual = icp.residual;
  rep.icp_degenerate = icp.degenerate;

  PointSet2D aligned = src;
  for (std::size_t i = 0; i < aligned.size(); ++i)
    icp.transform.apply(src.xs[i], src.ys[i], aligned.xs[i], aligned.ys[i]);
  rep.adnn_cells = adnn(aligned, tgt);
  rep.rmse_cells = rmse(aligned, tgt);
  rep.adnn_cm = rep.adnn_cells * 100.0 / truth.resolution;
  rep.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace marknav::eval
