#pragma once

#include "assignment.hpp"
#include "state_models.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace pmbm {

/// One mode of the Poisson intensity over objects that have never been
/// detected.
struct PoissonComponent {
    double log_weight = 0.0;
    StateEstimate state;
};

/// One data-association alternative for a single track: a Bernoulli
/// (existence-weighted Gaussian) plus the bookkeeping that drives the
/// track's adaptive detection probability.
struct SingleTargetHypothesis {
    double existence = 0.0;  // r
    StateEstimate state;
    double log_likelihood_contribution = 0.0;
    std::optional<std::size_t> associated_measurement;  // index into this frame's measurements
    std::vector<double> score_history;                  // recent confidences, bounded window
    int consecutive_misses = 0;
};

/// All live hypotheses for one physical track, sharing a persistent id.
struct TrackTree {
    std::int64_t track_id = 0;
    std::vector<SingleTargetHypothesis> hypotheses;
    std::int64_t birth_frame = 0;
};

/// One joint association explanation: picks at most one hypothesis per
/// track. Keyed by track_id so iteration order is deterministic.
struct GlobalHypothesis {
    double log_weight = 0.0;
    std::map<std::int64_t, std::size_t> selection;
};

/// Poisson (undetected) + multi-Bernoulli mixture (detected) posterior.
struct PMBMState {
    std::vector<PoissonComponent> ppp;
    std::vector<TrackTree> tracks;
    std::vector<GlobalHypothesis> globals;
    std::int64_t frame = 0;
    std::int64_t next_track_id = 1;  // monotone id source; ids are never reused
};

struct FilterParams {
    MotionParams motion;
    MeasurementParams meas;
    std::vector<PoissonComponent> birth;  // appended to the PPP every prediction
    int k_best = 10;                      // assignments kept per parent hypothesis

    // Reduction controls (log-weight thresholds are post-normalization).
    double prune_sth_logw = -9.210340371976182;     // log(1e-4)
    double prune_global_logw = -9.210340371976182;  // log(1e-4)
    double prune_ppp_logw = -11.512925464970229;    // log(1e-5)
    int cap_globals = 100;
    int cap_tracks = 1000;
    double recycle_r_threshold = 0.1;
    double extract_r_threshold = 0.5;

    // Adaptive per-track detection probability.
    double pd_floor = 0.1;
    double pd_ceiling = 0.97;
    int score_window = 5;

    // Trees whose every hypothesis is this stale (and already below the
    // recycle threshold) are dropped outright.
    int terminate_misses = 8;
};

/// One reported track: MAP-global selection above the existence threshold.
struct TrackEstimate {
    std::int64_t track_id = 0;
    StateEstimate state;
    double existence = 0.0;
    /// Measurement index this track consumed in the most recent update, if
    /// the reported hypothesis associated one (empty on a coasted frame).
    std::optional<std::size_t> associated_measurement;
};

/// Bernoulli existence after a misdetection: r(1 - pd) / (1 - r * pd).
double misdetection_existence(double r, double pd);

/// Detection probability for a track: mean of its recent confidence scores,
/// clamped to [pd_floor, pd_ceiling]. Falls back to the global setting for
/// an empty history.
double effective_detection_probability(const SingleTargetHypothesis& sth,
                                       const FilterParams& params);

/// Advance every component and hypothesis by dt: PPP weights scale by the
/// survival probability, Bernoulli existences scale likewise, birth
/// components are appended. Global hypotheses are untouched.
PMBMState pmbm_predict(const PMBMState& state, double dt, const FilterParams& params);

/// Association cost matrix for one parent global hypothesis: one row per
/// measurement; one column per selected track hypothesis (cost
/// -log(r * pd * likelihood), +inf outside the gate) followed by one
/// birth/clutter column per measurement (cost -log(clutter + score * ppp
/// detection mass), always finite).
assignment::CostMatrix build_cost_matrix(const PMBMState& state, const GlobalHypothesis& g,
                                         const std::vector<Measurement>& measurements,
                                         const std::vector<double>& scores,
                                         const FilterParams& params);

/// Measurement update: PPP decays by (1 - pd); each measurement seeds a
/// first-detection Bernoulli from the gated PPP mass; every prior
/// hypothesis branches into a misdetection child and one association child
/// per gated measurement; each parent global spawns its k-best assignment
/// children.
PMBMState pmbm_update(const PMBMState& state, const std::vector<Measurement>& measurements,
                      const std::vector<double>& scores, const FilterParams& params);

/// Hypothesis reduction: prune, cap, recycle low-existence Bernoullis into
/// the PPP, merge identical globals, renormalize.
PMBMState pmbm_reduce(const PMBMState& state, const FilterParams& params);

/// Tracks selected by the highest-weight global with existence above the
/// extraction threshold, ordered by track_id.
std::vector<TrackEstimate> extract_estimates(const PMBMState& state, const FilterParams& params);

}  // namespace pmbm
