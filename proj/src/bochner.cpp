#include "dynip/bochner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "dynip/errors.hpp"

namespace dynip {

namespace {

constexpr double kExponentTol = 1e-12;

double powered(double a, double p) { return p == 2.0 ? a * a : std::pow(a, p); }

double root(double s, double p) {
  if (p == 2.0) return std::sqrt(s);
  if (p == 1.0) return s;
  return std::pow(s, 1.0 / p);
}

void require_exponent(double p, const char* what) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidInput(std::string(what) + " exponent must lie in [1, inf)");
}

bool conjugate(double p, double q) {
  return p > 1.0 && q > 1.0 && std::abs(1.0 / p + 1.0 / q - 1.0) <= kExponentTol;
}

}  // namespace

// TimeGrid

TimeGrid::TimeGrid(double horizon, std::size_t count)
    : TimeGrid(horizon, count, horizon / static_cast<double>(count == 0 ? 1 : count)) {}

TimeGrid::TimeGrid(double horizon, std::size_t count, double step)
    : horizon_(horizon), count_(count), step_(step) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidParameter("time horizon must be positive and finite");
  if (count == 0) throw InvalidParameter("time grid needs at least one node");
}

TimeGrid TimeGrid::from_step(double step, std::size_t count) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidParameter("time step must be positive and finite");
  return TimeGrid(step * static_cast<double>(count), count, step);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(count_);
  for (std::size_t i = 0; i < count_; ++i) t[i] = node(i);
  return t;
}

bool TimeGrid::compatible(const TimeGrid& other) const noexcept {
  return count_ == other.count_ &&
         std::abs(step_ - other.step_) <= 1e-12 * std::max(step_, other.step_);
}

// SpaceMetric

double SpaceMetric::norm(std::span<const double> x) const {
  double s = 0.0;
  for (double v : x) s += powered(std::abs(v), exponent);
  return root(weight * s, exponent);
}

double SpaceMetric::inner(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw DimensionError("inner product of vectors of unequal length");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return weight * s;
}

// SpatialGrid

SpatialGrid::SpatialGrid(double lower, double upper, std::size_t count, double exponent)
    : lower_(lower), upper_(upper), count_(count), step_(0.0), exponent_(exponent) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
    throw InvalidParameter("spatial grid needs finite endpoints a < b");
  if (count == 0) throw InvalidParameter("spatial grid needs at least one cell");
  require_exponent(exponent, "space");
  step_ = (upper - lower) / static_cast<double>(count);
}

std::vector<double> SpatialGrid::nodes() const {
  std::vector<double> x(count_);
  for (std::size_t j = 0; j < count_; ++j) x[j] = node(j);
  return x;
}

// BochnerFunction

BochnerFunction::BochnerFunction(TimeGrid grid, std::size_t dim, SpaceMetric metric,
                                 double exponent)
    : BochnerFunction(grid, dim, metric, exponent, std::vector<double>(grid.size() * dim, 0.0)) {}

BochnerFunction::BochnerFunction(TimeGrid grid, std::size_t dim, SpaceMetric metric,
                                 double exponent, std::vector<double> values)
    : grid_(grid), dim_(dim), metric_(metric), exponent_(exponent), values_(std::move(values)) {
  if (dim_ == 0) throw DimensionError("spatial dimension must be positive");
  if (values_.size() != grid_.size() * dim_)
    throw DimensionError("value count does not match n_t * n_x");
  if (!(metric_.weight > 0.0)) throw InvalidParameter("spatial weight must be positive");
  require_exponent(exponent_, "time");
  require_exponent(metric_.exponent, "space");
  require_finite();
}

BochnerFunction BochnerFunction::constant(TimeGrid grid, std::span<const double> x,
                                          SpaceMetric metric, double exponent) {
  std::vector<double> values;
  values.reserve(grid.size() * x.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values.insert(values.end(), x.begin(), x.end());
  return BochnerFunction(grid, x.size(), metric, exponent, std::move(values));
}

std::span<const double> BochnerFunction::at(std::size_t i) const {
  if (i >= grid_.size()) throw DimensionError("time index out of range");
  return std::span<const double>(values_).subspan(i * dim_, dim_);
}

std::span<double> BochnerFunction::at(std::size_t i) {
  if (i >= grid_.size()) throw DimensionError("time index out of range");
  return std::span<double>(values_).subspan(i * dim_, dim_);
}

BochnerFunction BochnerFunction::with_exponents(double time_exponent,
                                                double space_exponent) const {
  return BochnerFunction(grid_, dim_, {metric_.weight, space_exponent}, time_exponent, values_);
}

void BochnerFunction::require_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("space-time function has non-finite entries");
}

bool BochnerFunction::same_shape(const BochnerFunction& other) const noexcept {
  return dim_ == other.dim_ && grid_.compatible(other.grid_) &&
         metric_.weight == other.metric_.weight;
}

BochnerFunction& BochnerFunction::operator+=(const BochnerFunction& other) {
  if (!same_shape(other)) throw DimensionError("adding space-time functions of different shape");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

BochnerFunction& BochnerFunction::operator-=(const BochnerFunction& other) {
  if (!same_shape(other))
    throw DimensionError("subtracting space-time functions of different shape");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

BochnerFunction& BochnerFunction::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

// Norms and pairings

double bochner_norm(const BochnerFunction& u) {
  u.require_finite();
  const double p = u.exponent();
  double s = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); ++i)
    s += u.grid().step() * powered(u.metric().norm(u.at(i)), p);
  return root(s, p);
}

double bochner_inner(const BochnerFunction& u, const BochnerFunction& v) {
  if (u.exponent() != 2.0 || v.exponent() != 2.0 || u.metric().exponent != 2.0 ||
      v.metric().exponent != 2.0)
    throw Unsupported("inner product requires time and space exponent 2");
  if (!u.same_shape(v)) throw DimensionError("inner product of functions on different grids");
  u.require_finite();
  v.require_finite();
  double s = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); ++i)
    s += u.grid().step() * u.metric().inner(u.at(i), v.at(i));
  return s;
}

HolderPairing holder_pairing(const BochnerFunction& u, const BochnerFunction& v) {
  if (!conjugate(u.exponent(), v.exponent()))
    throw InvalidInput("time exponents are not conjugate");
  if (!conjugate(u.metric().exponent, v.metric().exponent))
    throw InvalidInput("space exponents are not conjugate");
  if (!u.same_shape(v)) throw DimensionError("Hoelder pairing of functions on different grids");
  u.require_finite();
  v.require_finite();
  double s = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    double local = 0.0;
    auto ui = u.at(i);
    auto vi = v.at(i);
    for (std::size_t j = 0; j < ui.size(); ++j) local += ui[j] * vi[j];
    s += u.grid().step() * u.metric().weight * local;
  }
  return {s, bochner_norm(u) * bochner_norm(v)};
}

// Translation and interpolation

std::size_t shift_steps(const TimeGrid& grid, double z) {
  if (!(z >= 0.0) || !(z < grid.horizon()))
    throw DomainError("shift must lie in [0, T)");
  const auto k = static_cast<std::size_t>(std::llround(z / grid.step()));
  if (k >= grid.size()) throw DomainError("shift leaves no overlap with the time grid");
  return k;
}

BochnerFunction translate(const BochnerFunction& u, double z) {
  const std::size_t k = shift_steps(u.grid(), z);
  if (k == 0) return u;
  const std::size_t n = u.grid().size() - k;
  auto src = u.values();
  std::vector<double> values(src.begin() + static_cast<std::ptrdiff_t>(k * u.dim()), src.end());
  return BochnerFunction(TimeGrid::from_step(u.grid().step(), n), u.dim(), u.metric(),
                         u.exponent(), std::move(values));
}

BochnerFunction interpolate_tracked(const std::vector<std::vector<double>>& snapshots,
                                    const TimeGrid& grid, SpaceMetric metric, double exponent) {
  if (snapshots.empty()) throw InvalidInput("no snapshots to interpolate");
  if (snapshots.size() != 1 && snapshots.size() != grid.size())
    throw DimensionError("need one snapshot per time node");
  const std::size_t dim = snapshots.front().size();
  std::vector<double> values;
  values.reserve(grid.size() * dim);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& x = snapshots.size() == 1 ? snapshots.front() : snapshots[i];
    if (x.size() != dim) throw DimensionError("snapshots have different dimensions");
    values.insert(values.end(), x.begin(), x.end());
  }
  return BochnerFunction(grid, dim, metric, exponent, std::move(values));
}

// CSV

std::string to_csv(const BochnerFunction& u) {
  std::string out = "t";
  for (std::size_t j = 0; j < u.dim(); ++j) out += ",x_" + std::to_string(j);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", u.grid().node(i));
    out += buf;
    for (double v : u.at(i)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> row;
  const char* p = line.c_str();
  while (true) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) throw InvalidInput("CSV line " + std::to_string(line_no) + ": bad number");
    row.push_back(v);
    p = end;
    if (*p == '\0' || *p == '\r') break;
    if (*p != ',') throw InvalidInput("CSV line " + std::to_string(line_no) + ": expected ','");
    ++p;
  }
  return row;
}

}  // namespace

BochnerFunction from_csv(std::string_view text, SpaceMetric metric, double exponent,
                         std::optional<TimeGrid> grid) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t columns = 1;
  if (line.rfind("t", 0) != 0) throw InvalidInput("CSV header must start with 't'");
  for (std::size_t pos = 1; pos < line.size();) {
    const std::string expect = ",x_" + std::to_string(columns - 1);
    if (line.compare(pos, expect.size(), expect) != 0)
      throw InvalidInput("CSV header must read t,x_0,...,x_{n-1}");
    pos += expect.size();
    ++columns;
  }
  const std::size_t dim = columns - 1;
  if (dim == 0) throw InvalidInput("CSV has no value columns");

  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = parse_row(line, line_no);
    if (row.size() != columns)
      throw InvalidInput("CSV line " + std::to_string(line_no) + ": wrong column count");
    times.push_back(row[0]);
    values.insert(values.end(), row.begin() + 1, row.end());
  }
  if (times.empty()) throw InvalidInput("CSV has no rows");

  TimeGrid g = grid ? *grid : TimeGrid::from_step(2.0 * times.front(), times.size());
  if (g.size() != times.size()) throw DimensionError("CSV row count does not match time grid");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - g.node(i)) > 1e-12 * std::max(1.0, std::abs(g.node(i))))
      throw InvalidInput("CSV time column is not a uniform midpoint grid");
  return BochnerFunction(g, dim, metric, exponent, std::move(values));
}

}  // namespace dynip
