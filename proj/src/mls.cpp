#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "turnscan/error.hpp"
#include "turnscan/smooth.hpp"
#include "turnscan/spatial.hpp"

namespace turnscan {
namespace {

std::vector<std::pair<int, int>> monomials(int order) {
  std::vector<std::pair<int, int>> terms;
  for (int total = 0; total <= order; ++total) {
    for (int a = total; a >= 0; --a) terms.emplace_back(a, total - a);
  }
  return terms;
}

/// Height polynomial over the local tangent frame, in coordinates scaled by
/// 1 / radius.
struct LocalFit {
  Vec3 origin;
  Vec3 u, v, n;
  Eigen::VectorXd coeffs;
  double scale = 1.0;
  const std::vector<std::pair<int, int>>* terms = nullptr;

  double height(double x, double y) const {
    const double xs = x / scale, ys = y / scale;
    double h = 0.0;
    for (std::size_t k = 0; k < terms->size(); ++k)
      h += coeffs[static_cast<Eigen::Index>(k)] * std::pow(xs, (*terms)[k].first) * std::pow(ys, (*terms)[k].second);
    return h * scale;
  }

  // Partial derivatives of height with respect to unscaled x and y.
  std::pair<double, double> gradient(double x, double y) const {
    const double xs = x / scale, ys = y / scale;
    double gx = 0.0, gy = 0.0;
    for (std::size_t k = 0; k < terms->size(); ++k) {
      const auto [a, b] = (*terms)[k];
      const double c = coeffs[static_cast<Eigen::Index>(k)];
      if (a > 0) gx += c * a * std::pow(xs, a - 1) * std::pow(ys, b);
      if (b > 0) gy += c * b * std::pow(xs, a) * std::pow(ys, b - 1);
    }
    return {gx, gy};
  }

  Vec3 point(double x, double y) const { return origin + x * u + y * v + height(x, y) * n; }

  Vec3 normal(double x, double y, const Vec3& reference) const {
    const auto [gx, gy] = gradient(x, y);
    Vec3 normal = (n - gx * u - gy * v).normalized();
    if (normal.dot(reference) < 0.0) normal = -normal;
    return normal;
  }
};

}  // namespace

MlsResult mls_smooth(const PointCloud& cloud, const MlsParams& params, Exec exec) {
  if (!cloud.has_normals()) throw InvalidInput("mls_smooth: cloud has no normals");
  if (!(params.search_radius > 0.0)) throw InvalidInput("mls_smooth: search radius must be positive");
  if (params.polynomial_order < 1 || params.polynomial_order > 3)
    throw InvalidInput("mls_smooth: polynomial order must be 1, 2 or 3");

  MlsResult result;
  if (cloud.empty()) {
    result.cloud = cloud;
    return result;
  }

  const auto terms = monomials(params.polynomial_order);
  const auto term_count = static_cast<Eigen::Index>(terms.size());
  const double r = params.search_radius;
  const double up_radius = params.upsample_radius > 0.0 ? params.upsample_radius : r / 2.0;
  const double up_step = params.upsample_step > 0.0 ? params.upsample_step : up_radius / 2.0;
  const KdTree tree(cloud.points);

  const std::size_t n = cloud.size();
  std::vector<Vec3> points(n), normals(n);
  std::vector<std::vector<std::pair<Vec3, Vec3>>> extra(params.upsample ? n : 0);
  std::vector<std::uint8_t> unchanged(n, 0);

  parallel_for(exec, n, [&](std::size_t i) {
    const Vec3& p = cloud.points[i];
    const Vec3& input_normal = (*cloud.normals)[i];
    points[i] = p;
    normals[i] = input_normal;

    std::vector<Neighbor> nn;
    tree.radius_search(p, r, nn);
    if (static_cast<Eigen::Index>(nn.size()) < term_count) {
      unchanged[i] = 1;
      return;
    }

    std::vector<double> w(nn.size());
    double wsum = 0.0;
    Vec3 centroid = Vec3::Zero();
    for (std::size_t j = 0; j < nn.size(); ++j) {
      w[j] = std::exp(-(nn[j].distance * nn[j].distance) / (r * r));
      wsum += w[j];
      centroid += w[j] * cloud.points[nn[j].index];
    }
    centroid /= wsum;
    Mat3 cov = Mat3::Zero();
    for (std::size_t j = 0; j < nn.size(); ++j) {
      const Vec3 d = cloud.points[nn[j].index] - centroid;
      cov += w[j] * d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    LocalFit fit;
    fit.n = eig.eigenvectors().col(0).normalized();
    if (fit.n.dot(input_normal) < 0.0) fit.n = -fit.n;
    fit.u = fit.n.unitOrthogonal();
    fit.v = fit.n.cross(fit.u);
    fit.origin = p - fit.n * (p - centroid).dot(fit.n);
    fit.scale = r;
    fit.terms = &terms;

    Eigen::MatrixXd design(static_cast<Eigen::Index>(nn.size()), term_count);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nn.size()));
    for (std::size_t j = 0; j < nn.size(); ++j) {
      const Vec3 d = cloud.points[nn[j].index] - fit.origin;
      const double x = d.dot(fit.u) / r, y = d.dot(fit.v) / r, h = d.dot(fit.n) / r;
      const double sw = std::sqrt(w[j]);
      const auto row = static_cast<Eigen::Index>(j);
      for (Eigen::Index k = 0; k < term_count; ++k)
        design(row, k) = sw * std::pow(x, terms[k].first) * std::pow(y, terms[k].second);
      rhs[row] = sw * h;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < term_count) {
      unchanged[i] = 1;
      return;
    }
    fit.coeffs = qr.solve(rhs);

    points[i] = fit.point(0.0, 0.0);
    normals[i] = fit.normal(0.0, 0.0, input_normal);

    if (params.upsample) {
      const int steps = static_cast<int>(std::floor(up_radius / up_step));
      for (int a = -steps; a <= steps; ++a) {
        for (int b = -steps; b <= steps; ++b) {
          if (a == 0 && b == 0) continue;
          const double x = a * up_step, y = b * up_step;
          if (x * x + y * y > up_radius * up_radius) continue;
          extra[i].emplace_back(fit.point(x, y), fit.normal(x, y, input_normal));
        }
      }
    }
  });

  for (std::uint8_t u : unchanged) result.unchanged_count += u;
  result.cloud.points = std::move(points);
  result.cloud.normals = std::move(normals);
  if (params.upsample) {
    for (const auto& samples : extra) {
      for (const auto& [p, nrm] : samples) {
        result.cloud.points.push_back(p);
        result.cloud.normals->push_back(nrm);
      }
    }
  }
  return result;
}

}  // namespace turnscan
