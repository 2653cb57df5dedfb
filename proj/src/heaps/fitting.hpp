#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>

namespace heaps {

enum class Transform { LogLog, LinLin, LinLog };

std::string_view to_string(Transform transform);
std::optional<Transform> parse_transform(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct FitResult {
  Estimate slope;
  Estimate intercept;
  double pearson_r = 0.0;
  Transform transform = Transform::LinLin;
  std::size_t n_points = 0;
};

// Unweighted least squares on transformed axes. LogLog takes ln of both
// coordinates, LinLog of x only. Standard errors are the usual OLS ones from
// the residual variance (zero when only two points are given).
FitResult fit(std::span<const Point> points, Transform transform);

// Least-squares slope of y = a·x through the origin.
Estimate proportionality_fit(std::span<const Point> points);

Point transformed(const Point& p, Transform transform);

// Header `x,y,tx,ty,residual`.
void write_fit_csv(std::ostream& out, std::span<const Point> points, const FitResult& result);

}  // namespace heaps
