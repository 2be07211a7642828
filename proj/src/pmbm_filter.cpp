#include "pmbm_filter.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace pmbm {

namespace {

constexpr double kTinyProb = 1e-300;

double safe_log(double x) { return std::log(std::max(x, kTinyProb)); }

double log_sum_exp(const std::vector<double>& logs) {
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    const double peak = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - peak);
    return peak + std::log(acc);
}

/// Shift log-weights so they sum to one in linear space.
void normalize_log_weights(std::vector<GlobalHypothesis>& globals) {
    if (globals.empty()) return;
    std::vector<double> logs;
    logs.reserve(globals.size());
    for (const auto& g : globals) logs.push_back(g.log_weight);
    const double total = log_sum_exp(logs);
    for (auto& g : globals) g.log_weight -= total;
}

void append_score(std::vector<double>& history, double score, int window) {
    history.push_back(score);
    if (static_cast<int>(history.size()) > window) {
        history.erase(history.begin(), history.end() - window);
    }
}

}  // namespace

double misdetection_existence(double r, double pd) {
    const double denom = 1.0 - r * pd;
    if (denom <= 0.0) return 0.0;  // r = pd = 1: detection was certain, absence disproves it
    return r * (1.0 - pd) / denom;
}

double effective_detection_probability(const SingleTargetHypothesis& sth,
                                       const FilterParams& params) {
    double pd = params.meas.detection_probability;
    if (!sth.score_history.empty()) {
        pd = std::accumulate(sth.score_history.begin(), sth.score_history.end(), 0.0) /
             static_cast<double>(sth.score_history.size());
    }
    return std::clamp(pd, params.pd_floor, params.pd_ceiling);
}

PMBMState pmbm_predict(const PMBMState& state, double dt, const FilterParams& params) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("pmbm_predict: dt must be positive, got " +
                                    std::to_string(dt));
    }
    const double log_ps = safe_log(params.motion.survival_probability);

    PMBMState out = state;
    for (auto& comp : out.ppp) {
        comp.state = cv_predict(comp.state, dt, params.motion);
        comp.log_weight += log_ps;
    }
    out.ppp.insert(out.ppp.end(), params.birth.begin(), params.birth.end());

    for (auto& tree : out.tracks) {
        for (auto& hyp : tree.hypotheses) {
            hyp.state = cv_predict(hyp.state, dt, params.motion);
            hyp.existence *= params.motion.survival_probability;
        }
    }
    return out;
}

namespace {

/// Per-measurement quantities shared by every parent global hypothesis:
/// the gated-PPP detection mass rho(z), the moment-matched first-detection
/// Bernoulli, and the always-finite birth/clutter column cost.
struct BirthCandidate {
    double rho = 0.0;             // sum over gated PPP comps of w * pd * likelihood
    double birth_cost = 0.0;      // -log(clutter + score * rho)
    SingleTargetHypothesis sth;   // existence = score*rho / (clutter + score*rho)
};

BirthCandidate make_birth_candidate(const PMBMState& state, const Measurement& z, double score,
                                    std::size_t meas_index, const FilterParams& params) {
    const double pd = params.meas.detection_probability;

    std::vector<double> log_w;       // log(comp weight * pd * likelihood)
    std::vector<StateEstimate> upd;  // Kalman-updated component states
    for (const auto& comp : state.ppp) {
        if (mahalanobis_sq(comp.state, z, params.meas) > params.meas.gate_threshold) continue;
        const KalmanResult res = kalman_update(comp.state, z, params.meas);
        log_w.push_back(comp.log_weight + safe_log(pd) + res.log_likelihood);
        upd.push_back(res.state);
    }

    BirthCandidate cand;
    const double log_rho = log_sum_exp(log_w);
    cand.rho = std::isfinite(log_rho) ? std::exp(log_rho) : 0.0;

    const double denom = params.meas.clutter_intensity + score * cand.rho;
    cand.birth_cost = -safe_log(denom);

    cand.sth.existence = denom > 0.0 ? score * cand.rho / denom : 0.0;
    cand.sth.log_likelihood_contribution = safe_log(denom);
    cand.sth.associated_measurement = meas_index;
    cand.sth.score_history = {score};
    cand.sth.consecutive_misses = 0;

    if (upd.empty()) {
        // Nothing in the undetected intensity explains this measurement:
        // a pure-clutter Bernoulli (existence 0) that reduction will drop.
        cand.sth.state.mean << z.z(0), z.z(1), 0.0, 0.0;
        cand.sth.state.covariance = Mat4::Identity() * 100.0;
        cand.sth.state.covariance.topLeftCorner<2, 2>() = params.meas.measurement_noise;
        return cand;
    }

    // Moment-match the gated components into a single Gaussian.
    std::vector<double> w(log_w.size());
    for (std::size_t i = 0; i < log_w.size(); ++i) w[i] = std::exp(log_w[i] - log_rho);
    Vec4 mean = Vec4::Zero();
    for (std::size_t i = 0; i < upd.size(); ++i) mean += w[i] * upd[i].mean;
    Mat4 cov = Mat4::Zero();
    for (std::size_t i = 0; i < upd.size(); ++i) {
        const Vec4 d = upd[i].mean - mean;
        cov += w[i] * (upd[i].covariance + d * d.transpose());
    }
    cand.sth.state.mean = mean;
    cand.sth.state.covariance = symmetrize(cov);
    return cand;
}

/// Column order of the selected track hypotheses in a cost matrix: ascending
/// track_id (the selection map's iteration order).
struct SelectedColumn {
    std::size_t track_index;  // into state.tracks
    std::size_t hyp_index;    // into that tree's hypotheses
};

std::vector<SelectedColumn> selected_columns(const PMBMState& state, const GlobalHypothesis& g) {
    std::unordered_map<std::int64_t, std::size_t> tree_of;
    tree_of.reserve(state.tracks.size());
    for (std::size_t t = 0; t < state.tracks.size(); ++t) tree_of[state.tracks[t].track_id] = t;

    std::vector<SelectedColumn> cols;
    cols.reserve(g.selection.size());
    for (const auto& [track_id, hyp_index] : g.selection) {
        const auto it = tree_of.find(track_id);
        if (it == tree_of.end() || hyp_index >= state.tracks[it->second].hypotheses.size()) {
            throw std::invalid_argument("global hypothesis references unknown track " +
                                        std::to_string(track_id));
        }
        cols.push_back({it->second, hyp_index});
    }
    return cols;
}

}  // namespace

assignment::CostMatrix build_cost_matrix(const PMBMState& state, const GlobalHypothesis& g,
                                         const std::vector<Measurement>& measurements,
                                         const std::vector<double>& scores,
                                         const FilterParams& params) {
    const auto cols = selected_columns(state, g);
    const std::size_t m = measurements.size();
    assignment::CostMatrix cost(m, cols.size() + m);

    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& hyp = state.tracks[cols[j].track_index].hypotheses[cols[j].hyp_index];
        const double pd = effective_detection_probability(hyp, params);
        for (std::size_t i = 0; i < m; ++i) {
            if (mahalanobis_sq(hyp.state, measurements[i], params.meas) >
                params.meas.gate_threshold) {
                continue;  // stays forbidden
            }
            const KalmanResult res = kalman_update(hyp.state, measurements[i], params.meas);
            cost.at(i, j) = -(safe_log(hyp.existence * pd) + res.log_likelihood);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        const BirthCandidate cand =
            make_birth_candidate(state, measurements[i], scores[i], i, params);
        cost.at(i, cols.size() + i) = cand.birth_cost;
    }
    return cost;
}

namespace {

/// All children of one prior hypothesis: the misdetection branch plus one
/// association branch per gated measurement.
struct HypothesisChildren {
    std::size_t miss_index = 0;  // position of the misdetection child in the new tree
    std::unordered_map<std::size_t, std::size_t> assoc_index;  // measurement -> position
    double log_miss = 0.0;                                     // log(1 - r * pd)
};

}  // namespace

PMBMState pmbm_update(const PMBMState& state, const std::vector<Measurement>& measurements,
                      const std::vector<double>& scores, const FilterParams& params) {
    if (measurements.size() != scores.size()) {
        throw std::invalid_argument("pmbm_update: " + std::to_string(measurements.size()) +
                                    " measurements but " + std::to_string(scores.size()) +
                                    " scores");
    }
    std::vector<double> s(scores);
    for (double& v : s) v = std::clamp(v, 0.0, 1.0);
    const std::size_t m = measurements.size();

    PMBMState out;
    out.frame = state.frame + 1;
    out.next_track_id = state.next_track_id;

    // (a) Undetected objects that stay undetected: weight decays by (1 - pd).
    const double log_missed = safe_log(1.0 - params.meas.detection_probability);
    out.ppp = state.ppp;
    for (auto& comp : out.ppp) comp.log_weight += log_missed;

    // (c) Branch every prior hypothesis of every tree.
    std::vector<std::vector<HypothesisChildren>> children(state.tracks.size());
    out.tracks.reserve(state.tracks.size() + m);
    for (std::size_t t = 0; t < state.tracks.size(); ++t) {
        const TrackTree& tree = state.tracks[t];
        TrackTree next;
        next.track_id = tree.track_id;
        next.birth_frame = tree.birth_frame;
        children[t].resize(tree.hypotheses.size());

        for (std::size_t h = 0; h < tree.hypotheses.size(); ++h) {
            const SingleTargetHypothesis& prior = tree.hypotheses[h];
            const double pd = effective_detection_probability(prior, params);
            HypothesisChildren& ch = children[t][h];

            SingleTargetHypothesis miss = prior;
            miss.existence = misdetection_existence(prior.existence, pd);
            miss.log_likelihood_contribution = safe_log(1.0 - prior.existence * pd);
            miss.associated_measurement.reset();
            miss.consecutive_misses = prior.consecutive_misses + 1;
            ch.miss_index = next.hypotheses.size();
            ch.log_miss = miss.log_likelihood_contribution;
            next.hypotheses.push_back(std::move(miss));

            for (std::size_t i : gate(prior.state, measurements, params.meas)) {
                const KalmanResult res = kalman_update(prior.state, measurements[i], params.meas);
                SingleTargetHypothesis assoc;
                assoc.existence = 1.0;
                assoc.state = res.state;
                assoc.log_likelihood_contribution =
                    safe_log(prior.existence * pd) + res.log_likelihood;
                assoc.associated_measurement = i;
                assoc.score_history = prior.score_history;
                append_score(assoc.score_history, s[i], params.score_window);
                assoc.consecutive_misses = 0;
                ch.assoc_index[i] = next.hypotheses.size();
                next.hypotheses.push_back(std::move(assoc));
            }
        }
        out.tracks.push_back(std::move(next));
    }

    // (b) One first-detection Bernoulli per measurement, shared by all
    // parent globals; ids are consumed even if no global ends up using it.
    std::vector<std::int64_t> birth_track_id(m);
    for (std::size_t i = 0; i < m; ++i) {
        const BirthCandidate cand = make_birth_candidate(state, measurements[i], s[i], i, params);
        TrackTree tree;
        tree.track_id = out.next_track_id++;
        tree.birth_frame = out.frame;
        tree.hypotheses.push_back(cand.sth);
        birth_track_id[i] = tree.track_id;
        out.tracks.push_back(std::move(tree));
    }

    // (d) K-best assignment children per parent global hypothesis.
    std::vector<GlobalHypothesis> parents = state.globals;
    if (parents.empty()) parents.push_back(GlobalHypothesis{});  // the empty prior

    for (const GlobalHypothesis& parent : parents) {
        const auto cols = selected_columns(state, parent);
        const assignment::CostMatrix cost =
            build_cost_matrix(state, parent, measurements, s, params);

        std::vector<assignment::Assignment> best;
        try {
            best = assignment::murty_kbest(cost, params.k_best);
        } catch (const InfeasibleError&) {
            continue;  // cannot happen: birth columns keep every row matchable
        }

        for (const assignment::Assignment& a : best) {
            GlobalHypothesis child;
            child.log_weight = parent.log_weight - a.total_cost;

            std::vector<char> col_assigned(cols.size(), 0);
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t c = static_cast<std::size_t>(a.row_to_col[i]);
                if (c < cols.size()) {
                    const auto& sel = cols[c];
                    const std::int64_t id = state.tracks[sel.track_index].track_id;
                    child.selection[id] =
                        children[sel.track_index][sel.hyp_index].assoc_index.at(i);
                    col_assigned[c] = 1;
                } else {
                    child.selection[birth_track_id[c - cols.size()]] = 0;
                }
            }
            // Selected tracks that received no measurement take the
            // misdetection branch; its weight factor is not in the matrix.
            for (std::size_t c = 0; c < cols.size(); ++c) {
                if (col_assigned[c]) continue;
                const auto& sel = cols[c];
                const HypothesisChildren& ch = children[sel.track_index][sel.hyp_index];
                child.selection[state.tracks[sel.track_index].track_id] = ch.miss_index;
                child.log_weight += ch.log_miss;
            }
            out.globals.push_back(std::move(child));
        }
    }
    return out;
}

namespace {

/// Log of the total normalized global-hypothesis mass selecting each
/// hypothesis of each tree; -inf where unreferenced.
std::vector<std::vector<double>> selection_mass(const PMBMState& state) {
    std::unordered_map<std::int64_t, std::size_t> tree_of;
    for (std::size_t t = 0; t < state.tracks.size(); ++t) tree_of[state.tracks[t].track_id] = t;

    std::vector<std::vector<std::vector<double>>> logs(state.tracks.size());
    for (std::size_t t = 0; t < state.tracks.size(); ++t) {
        logs[t].resize(state.tracks[t].hypotheses.size());
    }
    for (const auto& g : state.globals) {
        for (const auto& [track_id, hyp] : g.selection) {
            logs[tree_of.at(track_id)][hyp].push_back(g.log_weight);
        }
    }
    std::vector<std::vector<double>> mass(state.tracks.size());
    for (std::size_t t = 0; t < logs.size(); ++t) {
        mass[t].resize(logs[t].size());
        for (std::size_t h = 0; h < logs[t].size(); ++h) mass[t][h] = log_sum_exp(logs[t][h]);
    }
    return mass;
}

/// Remove hypotheses flagged false and rewrite every selection index.
void erase_hypotheses(PMBMState& state, const std::vector<std::vector<char>>& keep) {
    std::unordered_map<std::int64_t, std::vector<std::size_t>> remap;
    for (std::size_t t = 0; t < state.tracks.size(); ++t) {
        TrackTree& tree = state.tracks[t];
        std::vector<std::size_t> new_index(tree.hypotheses.size(), SIZE_MAX);
        std::vector<SingleTargetHypothesis> kept;
        for (std::size_t h = 0; h < tree.hypotheses.size(); ++h) {
            if (!keep[t][h]) continue;
            new_index[h] = kept.size();
            kept.push_back(std::move(tree.hypotheses[h]));
        }
        tree.hypotheses = std::move(kept);
        remap[tree.track_id] = std::move(new_index);
    }
    for (auto& g : state.globals) {
        std::map<std::int64_t, std::size_t> updated;
        for (const auto& [track_id, hyp] : g.selection) {
            const std::size_t idx = remap.at(track_id)[hyp];
            if (idx != SIZE_MAX) updated[track_id] = idx;
        }
        g.selection = std::move(updated);
    }
}

void drop_empty_trees(PMBMState& state) {
    std::erase_if(state.tracks, [](const TrackTree& t) { return t.hypotheses.empty(); });
}

}  // namespace

PMBMState pmbm_reduce(const PMBMState& state, const FilterParams& params) {
    PMBMState out = state;

    std::erase_if(out.ppp, [&](const PoissonComponent& c) {
        return c.log_weight < params.prune_ppp_logw;
    });

    if (out.globals.empty()) {
        // Nothing references any hypothesis; only the Poisson part remains.
        out.tracks.clear();
        return out;
    }
    normalize_log_weights(out.globals);

    // Prune then cap global hypotheses; the best one always survives.
    const auto best_weight = [&]() {
        return std::max_element(out.globals.begin(), out.globals.end(),
                                [](const GlobalHypothesis& a, const GlobalHypothesis& b) {
                                    return a.log_weight < b.log_weight;
                                })
            ->log_weight;
    };
    const double top = best_weight();
    std::erase_if(out.globals, [&](const GlobalHypothesis& g) {
        return g.log_weight < params.prune_global_logw && g.log_weight < top;
    });
    if (static_cast<int>(out.globals.size()) > params.cap_globals) {
        std::stable_sort(out.globals.begin(), out.globals.end(),
                         [](const GlobalHypothesis& a, const GlobalHypothesis& b) {
                             return a.log_weight > b.log_weight;
                         });
        out.globals.resize(params.cap_globals);
    }
    normalize_log_weights(out.globals);

    // Prune hypotheses: unreferenced ones, and ones whose selecting mass is
    // negligible (never those picked by the best global — dropping them
    // would orphan it). Globals that selected a dropped hypothesis are
    // themselves negligible and go too.
    {
        const auto mass = selection_mass(out);
        std::size_t map_index = 0;
        for (std::size_t g = 1; g < out.globals.size(); ++g) {
            if (out.globals[g].log_weight > out.globals[map_index].log_weight) map_index = g;
        }
        std::unordered_map<std::int64_t, std::size_t> tree_of;
        for (std::size_t t = 0; t < out.tracks.size(); ++t) {
            tree_of[out.tracks[t].track_id] = t;
        }
        std::vector<std::vector<char>> keep(out.tracks.size());
        for (std::size_t t = 0; t < out.tracks.size(); ++t) {
            keep[t].assign(out.tracks[t].hypotheses.size(), 0);
            for (std::size_t h = 0; h < keep[t].size(); ++h) {
                keep[t][h] = std::isfinite(mass[t][h]) && mass[t][h] >= params.prune_sth_logw;
            }
        }
        for (const auto& [track_id, hyp] : out.globals[map_index].selection) {
            keep[tree_of.at(track_id)][hyp] = 1;
        }
        std::erase_if(out.globals, [&](const GlobalHypothesis& g) {
            for (const auto& [track_id, hyp] : g.selection) {
                if (!keep[tree_of.at(track_id)][hyp]) return true;
            }
            return false;
        });
        erase_hypotheses(out, keep);
        normalize_log_weights(out.globals);
    }

    // Hard termination of long-stale trees.
    {
        std::vector<std::int64_t> doomed;
        for (const auto& tree : out.tracks) {
            const bool all_stale = !tree.hypotheses.empty() &&
                                   std::all_of(tree.hypotheses.begin(), tree.hypotheses.end(),
                                               [&](const SingleTargetHypothesis& h) {
                                                   return h.consecutive_misses >
                                                              params.terminate_misses &&
                                                          h.existence <
                                                              params.recycle_r_threshold;
                                               });
            if (all_stale) doomed.push_back(tree.track_id);
        }
        for (std::int64_t id : doomed) {
            std::erase_if(out.tracks, [&](const TrackTree& t) { return t.track_id == id; });
            for (auto& g : out.globals) g.selection.erase(id);
        }
    }

    // Recycle low-existence hypotheses back into the Poisson intensity,
    // weighted by the global mass that believed in them.
    {
        const auto mass = selection_mass(out);
        std::vector<std::vector<char>> keep(out.tracks.size());
        for (std::size_t t = 0; t < out.tracks.size(); ++t) {
            TrackTree& tree = out.tracks[t];
            keep[t].assign(tree.hypotheses.size(), 1);
            for (std::size_t h = 0; h < tree.hypotheses.size(); ++h) {
                const auto& hyp = tree.hypotheses[h];
                if (hyp.existence >= params.recycle_r_threshold) continue;
                keep[t][h] = 0;
                if (!std::isfinite(mass[t][h])) continue;  // no believer, no mass to move
                PoissonComponent comp;
                comp.log_weight = safe_log(hyp.existence) + mass[t][h];
                comp.state = hyp.state;
                if (comp.log_weight >= params.prune_ppp_logw) out.ppp.push_back(comp);
            }
        }
        erase_hypotheses(out, keep);
    }

    // Cap the number of track trees, preferring the strongest believers.
    if (static_cast<int>(out.tracks.size()) > params.cap_tracks) {
        const auto mass = selection_mass(out);
        std::vector<std::pair<double, std::size_t>> ranked;  // (-total mass, index)
        for (std::size_t t = 0; t < out.tracks.size(); ++t) {
            ranked.emplace_back(-log_sum_exp(mass[t]), t);
        }
        std::stable_sort(ranked.begin(), ranked.end());
        std::vector<char> keep_tree(out.tracks.size(), 0);
        for (int i = 0; i < params.cap_tracks; ++i) keep_tree[ranked[i].second] = 1;

        std::vector<TrackTree> kept;
        for (std::size_t t = 0; t < out.tracks.size(); ++t) {
            if (keep_tree[t]) {
                kept.push_back(std::move(out.tracks[t]));
            } else {
                for (auto& g : out.globals) g.selection.erase(out.tracks[t].track_id);
            }
        }
        out.tracks = std::move(kept);
    }

    // Merge globals that ended up with identical selections.
    {
        std::vector<GlobalHypothesis> merged;
        for (auto& g : out.globals) {
            auto same = std::find_if(merged.begin(), merged.end(), [&](const GlobalHypothesis& h) {
                return h.selection == g.selection;
            });
            if (same == merged.end()) {
                merged.push_back(std::move(g));
            } else {
                same->log_weight = log_sum_exp({same->log_weight, g.log_weight});
            }
        }
        out.globals = std::move(merged);
    }
    normalize_log_weights(out.globals);
    drop_empty_trees(out);
    return out;
}

std::vector<TrackEstimate> extract_estimates(const PMBMState& state, const FilterParams& params) {
    std::vector<TrackEstimate> out;
    if (state.globals.empty()) return out;

    const auto best = std::max_element(state.globals.begin(), state.globals.end(),
                                       [](const GlobalHypothesis& a, const GlobalHypothesis& b) {
                                           return a.log_weight < b.log_weight;
                                       });
    std::unordered_map<std::int64_t, const TrackTree*> tree_of;
    for (const auto& tree : state.tracks) tree_of[tree.track_id] = &tree;

    for (const auto& [track_id, hyp_index] : best->selection) {
        const TrackTree* tree = tree_of.at(track_id);
        const SingleTargetHypothesis& hyp = tree->hypotheses.at(hyp_index);
        if (hyp.existence < params.extract_r_threshold) continue;
        out.push_back(TrackEstimate{track_id, hyp.state, hyp.existence,
                                    hyp.associated_measurement});
    }
    return out;
}

}  // namespace pmbm
