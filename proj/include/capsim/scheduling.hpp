#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsim/hierarchy.hpp"

namespace capsim {

/// Permutation traffic: pairing[source] = destination, a uniformly drawn
/// permutation of the node indices.
struct TrafficMatrix {
  int n = 0;
  std::vector<int> pairing;
};

TrafficMatrix random_permutation_traffic(int n, uint64_t seed);

/// One source-relay-destination routing decision. The source side of a
/// schedule (who talks into which relay cell) and the destination side
/// (which relay cell talks to whom) are projections of this list.
struct RelayAssignment {
  int source = 0;
  int relay_cell = 0;
  int destination = 0;
};

struct Schedule {
  std::vector<RelayAssignment> entries;
};

/// Decomposition of permutation traffic into relay schedules. In fast mode
/// every pair appears in exactly one schedule at weight 1. In slow mode
/// every pair appears in m_star schedules, each carrying weight scale =
/// 1/m_star, over m_star distinct relay cells.
struct ScheduleDecomposition {
  std::vector<Schedule> schedules;
  int level = 0;
  bool slow = false;
  double scale = 1.0;
  int m_star = 1;          // relays per pair (slow mode)
  double nominal_m = 0;    // k2 2^{-l-1} gamma before rounding
  int relay_cap = 1;       // max pairs into one relay cell per schedule
  double count_bound = 0;  // k3 2^l (fast) or k2 2^-l gamma^2 (slow)
};

/// Dense cells far enough from both pair endpoints to relay for them:
/// distance from each endpoint to the cell at least sqrt(2 a_{l+1}),
/// i.e. at least the cell diagonal.
std::vector<int> eligible_relays(const Point& source, const Point& dest,
                                 const DenseSquareletReport& dense,
                                 const HierarchyParams& params);

/// Greedy rounds: pairs in source order pick the least-loaded (then lowest
/// index) eligible cell with room; a round closes as soon as some pair
/// finds all of its eligible cells full. Throws Error("no-eligible-relay")
/// when a pair has no eligible dense cell at all.
ScheduleDecomposition decompose_fast(const TrafficMatrix& traffic,
                                     const DenseSquareletReport& dense,
                                     const NodePlacement& placement,
                                     const HierarchyParams& params);

/// Diversity rounds: each pair picks its m_star least-chosen eligible cells;
/// a round closes once some cell has been chosen by relay_cap pairs. The
/// round's picks split into m_star parallel schedules (pair j-th choice into
/// schedule j), which makes distinct schedules share no (source, relay) nor
/// (relay, destination) slot. Throws Error("no-eligible-relay") when a pair
/// has fewer than m_star eligible cells.
ScheduleDecomposition decompose_slow(const TrafficMatrix& traffic,
                                     const DenseSquareletReport& dense,
                                     const NodePlacement& placement,
                                     const HierarchyParams& params);

/// Independent recertification of everything the decomposition promises.
struct ScheduleAudit {
  bool reconstruction_exact = false;  // assignment weights sum back to the
                                      // traffic matrix entrywise
  bool row_sums_ok = false;           // each source/destination at most once
                                      // per schedule
  bool loads_ok = false;              // per-cell column sums <= relay_cap
  bool distances_ok = false;          // eligibility distance on every entry
  bool orthogonal = false;            // no shared slots across schedules
                                      // (slow mode; trivially true in fast)
  bool count_ok = false;              // schedule count within count_bound
                                      // (fast) or the realized round bound
                                      // (slow)
  bool lemma_count_ok = false;        // slow count also within the
                                      // asymptotic k2 2^-l gamma^2 form
  int schedule_count = 0;
  int min_relay_diversity = 0;  // distinct relay cells of the busiest-
                                // constrained pair (slow mode census)
};

ScheduleAudit audit_decomposition(const ScheduleDecomposition& d,
                                  const TrafficMatrix& traffic,
                                  const DenseSquareletReport& dense,
                                  const NodePlacement& placement,
                                  const HierarchyParams& params);

/// Sparse triplet export: schedule,source,relay_cell,destination,weight.
std::string schedules_csv(const ScheduleDecomposition& d);

}  // namespace capsim
