#include "ralm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ralm/errors.hpp"

namespace ralm {

std::vector<TagState> sample_uniform_positions(const CabinSpec& cabin, int count,
                                               uint64_t seed) {
  cabin.validate();
  std::vector<TagState> states;
  states.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    RngStream rng(seed, RngPurpose::kPositions, static_cast<uint64_t>(i));
    states.push_back({i, 0, {rng.uniform(cabin.x_min, cabin.x_max),
                             rng.uniform(cabin.y_min, cabin.y_max)}});
  }
  return states;
}

std::vector<TagState> generate_boarding_walk(const CabinSpec& cabin, int n_passengers,
                                             double step_length, uint64_t seed) {
  cabin.validate();
  if (n_passengers < 1) throw std::invalid_argument("n_passengers must be >= 1");
  if (step_length <= 0) throw std::invalid_argument("step_length must be positive");

  const double aisle_y = 0.5 * (cabin.y_min + cabin.y_max);
  const Point2D door{cabin.x_min, aisle_y};
  const double first_row = cabin.x_min + 0.07 * cabin.width();
  const double last_row = cabin.x_max - 0.02 * cabin.width();
  const double max_lateral = 0.5 * cabin.height() - 0.05 * cabin.height();

  std::vector<TagState> states;
  for (int pid = 0; pid < n_passengers; ++pid) {
    RngStream rng(seed, RngPurpose::kBoarding, static_cast<uint64_t>(pid));
    const double seat_x = rng.uniform(first_row, last_row);
    const double side = rng.next_double() < 0.5 ? -1.0 : 1.0;
    const double seat_y = aisle_y + side * rng.uniform(0.3 * max_lateral, max_lateral);

    int t = 0;
    // Aisle leg, door -> seat row.
    for (double x = door.x; x < seat_x; x += step_length) {
      states.push_back({pid, t++, {x, aisle_y}});
    }
    // Turn-in leg, aisle -> seat.
    const double dir = seat_y > aisle_y ? 1.0 : -1.0;
    for (double y = aisle_y; dir * (seat_y - y) > 0; y += dir * step_length) {
      states.push_back({pid, t++, {seat_x, y}});
    }
    states.push_back({pid, t, {seat_x, seat_y}});
  }
  return states;
}

namespace {

double parse_field(const std::string& text, const std::string& what, int row) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw DataError("malformed " + what + " '" + text + "' in data row " + std::to_string(row));
  }
  if (pos != text.size()) {
    throw DataError("malformed " + what + " '" + text + "' in data row " + std::to_string(row));
  }
  return v;
}

}  // namespace

std::vector<TagState> load_positions_csv(const std::string& path, const CabinSpec& cabin) {
  cabin.validate();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open positions file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty positions file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tag_id,time_step,x,y") {
    throw DataError("expected header 'tag_id,time_step,x,y', got '" + line + "'");
  }

  std::vector<TagState> states;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      throw DataError("expected 4 fields in data row " + std::to_string(row) + ", got " +
                      std::to_string(fields.size()));
    }
    TagState s;
    s.tag_id = static_cast<int>(parse_field(fields[0], "tag_id", row));
    s.time_step = static_cast<int>(parse_field(fields[1], "time_step", row));
    s.position.x = parse_field(fields[2], "x", row);
    s.position.y = parse_field(fields[3], "y", row);
    if (!cabin.contains(s.position)) {
      throw DataError("position out of cabin bounds in data row " + std::to_string(row));
    }
    states.push_back(s);
  }
  return states;
}

}  // namespace ralm
