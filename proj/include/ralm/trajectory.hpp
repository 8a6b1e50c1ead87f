#pragma once

#include <string>
#include <vector>

#include "ralm/geometry.hpp"
#include "ralm/rng.hpp"

namespace ralm {

struct TagState {
  int tag_id = 0;
  int time_step = 0;
  Point2D position;
};

// i.i.d. uniform positions over the cabin rectangle, one tag per state.
std::vector<TagState> sample_uniform_positions(const CabinSpec& cabin, int count,
                                               uint64_t seed);

// Simple boarding proxy: each passenger enters at the front door on the
// aisle centerline, walks aft to an assigned seat row, then turns in to the
// seat. Emits one state per step. Produces cabin-realistic position
// distributions only; no queueing or passenger interaction.
std::vector<TagState> generate_boarding_walk(const CabinSpec& cabin, int n_passengers = 148,
                                             double step_length = 0.5, uint64_t seed = 0);

// CSV with mandatory header `tag_id,time_step,x,y`. Rows outside the cabin
// bounds are rejected with their 1-based data row number.
std::vector<TagState> load_positions_csv(const std::string& path, const CabinSpec& cabin);

}  // namespace ralm
