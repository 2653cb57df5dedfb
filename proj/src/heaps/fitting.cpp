#include "heaps/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "heaps/error.hpp"

namespace heaps {

std::string_view to_string(Transform transform) {
  switch (transform) {
    case Transform::LogLog: return "loglog";
    case Transform::LinLin: return "linlin";
    case Transform::LinLog: return "linlog";
  }
  return "?";
}

std::optional<Transform> parse_transform(std::string_view name) {
  if (name == "loglog") return Transform::LogLog;
  if (name == "linlin") return Transform::LinLin;
  if (name == "linlog") return Transform::LinLog;
  return std::nullopt;
}

Point transformed(const Point& p, Transform transform) {
  switch (transform) {
    case Transform::LogLog:
      if (!(p.x > 0.0) || !(p.y > 0.0)) fail(ErrorCode::Domain, "log-log fit needs x > 0 and y > 0");
      return {std::log(p.x), std::log(p.y)};
    case Transform::LinLog:
      if (!(p.x > 0.0)) fail(ErrorCode::Domain, "linear-log fit needs x > 0");
      return {std::log(p.x), p.y};
    case Transform::LinLin:
      return p;
  }
  return p;
}

FitResult fit(std::span<const Point> points, Transform transform) {
  if (points.size() < 2) fail(ErrorCode::DegenerateInput, "a fit needs at least 2 points");
  std::vector<Point> t(points.size());
  std::transform(points.begin(), points.end(), t.begin(),
                 [transform](const Point& p) { return transformed(p, transform); });

  const auto count = static_cast<double>(t.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : t) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (const auto& p : t) {
    const double dx = p.x - mean_x;
    const double dy = p.y - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) fail(ErrorCode::DegenerateInput, "all x values are equal");

  FitResult r;
  r.transform = transform;
  r.n_points = t.size();
  r.slope.value = sxy / sxx;
  r.intercept.value = mean_y - r.slope.value * mean_x;
  r.pearson_r = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;

  double ssr = 0.0;
  double sum_x2 = 0.0;
  for (const auto& p : t) {
    const double residual = p.y - (r.intercept.value + r.slope.value * p.x);
    ssr += residual * residual;
    sum_x2 += p.x * p.x;
  }
  if (t.size() > 2) {
    const double s2 = ssr / (count - 2.0);
    r.slope.std_error = std::sqrt(s2 / sxx);
    r.intercept.std_error = std::sqrt(s2 * sum_x2 / (count * sxx));
  }
  return r;
}

Estimate proportionality_fit(std::span<const Point> points) {
  if (points.size() < 2) fail(ErrorCode::DegenerateInput, "a proportionality fit needs at least 2 points");
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    if (!(p.x > 0.0)) fail(ErrorCode::Domain, "proportionality fit needs x > 0");
    sxx += p.x * p.x;
    sxy += p.x * p.y;
  }
  Estimate e;
  e.value = sxy / sxx;
  double ssr = 0.0;
  for (const auto& p : points) {
    const double residual = p.y - e.value * p.x;
    ssr += residual * residual;
  }
  e.std_error = std::sqrt(ssr / static_cast<double>(points.size() - 1) / sxx);
  return e;
}

void write_fit_csv(std::ostream& out, std::span<const Point> points, const FitResult& result) {
  out << "x,y,tx,ty,residual\n" << std::setprecision(17);
  for (const auto& p : points) {
    const auto t = transformed(p, result.transform);
    const double residual = t.y - (result.intercept.value + result.slope.value * t.x);
    out << p.x << ',' << p.y << ',' << t.x << ',' << t.y << ',' << residual << '\n';
  }
}

}  // namespace heaps
