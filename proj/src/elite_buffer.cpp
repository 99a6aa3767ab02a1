#include "edrl/elite_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace edrl {

std::vector<EpisodeSequence> select_top_episodes(const std::vector<const ReplayBuffer*>& member_buffers,
                                                 std::size_t per_member,
                                                 std::vector<PlaneProvenance>* provenance) {
    if (member_buffers.empty()) throw std::invalid_argument("select_top_episodes: no members");
    if (per_member == 0) throw std::invalid_argument("select_top_episodes: per_member must be >= 1");
    std::vector<EpisodeSequence> out;
    if (provenance) provenance->clear();
    for (std::size_t m = 0; m < member_buffers.size(); ++m) {
        const ReplayBuffer& buf = *member_buffers[m];
        if (buf.episodes.size() < per_member)
            throw std::invalid_argument("select_top_episodes: member has fewer episodes than per_member");
        std::vector<std::size_t> order(buf.episodes.size());
        std::iota(order.begin(), order.end(), 0);
        // descending reward; equal rewards prefer the newer episode
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ra = buf.episodes[a].total_reward;
            const double rb = buf.episodes[b].total_reward;
            if (ra != rb) return ra > rb;
            return a > b;
        });
        for (std::size_t i = 0; i < per_member; ++i) {
            out.push_back(buf.episodes[order[i]]);
            if (provenance) provenance->push_back({m, order[i], buf.episodes[order[i]].total_reward});
        }
    }
    return out;
}

ReferenceBuffer build_reference_buffer(const std::vector<EpisodeSequence>& episodes, const EnvSpec& spec,
                                       std::vector<PlaneProvenance> provenance) {
    if (episodes.empty()) throw std::invalid_argument("build_reference_buffer: no episodes");
    const std::size_t H = spec.max_time_step;
    ComponentLayout layout{spec.state_dim, spec.action_dim};
    for (const EpisodeSequence& ep : episodes) {
        if (ep.transitions.size() != H)
            throw std::invalid_argument("build_reference_buffer: episode length != max_time_step");
        for (const Transition& tr : ep.transitions)
            if (tr.s.size() != spec.state_dim || tr.a.size() != spec.action_dim ||
                tr.s_next.size() != spec.state_dim)
                throw std::invalid_argument("build_reference_buffer: transition dims do not match spec");
    }
    ReferenceBuffer ref;
    ref.layout = layout;
    ref.data = Tensor3::zeros(layout.rows(), H, episodes.size());
    if (provenance.empty()) {
        for (std::size_t p = 0; p < episodes.size(); ++p)
            provenance.push_back({0, p, episodes[p].total_reward});
    } else if (provenance.size() != episodes.size()) {
        throw std::invalid_argument("build_reference_buffer: provenance length != episode count");
    }
    ref.provenance = std::move(provenance);
    for (std::size_t p = 0; p < episodes.size(); ++p) {
        for (std::size_t t = 0; t < H; ++t) {
            const Transition& tr = episodes[p].transitions[t];
            std::size_t row = 0;
            for (double v : tr.s) ref.data.at(row++, t, p) = v;
            for (double v : tr.a) ref.data.at(row++, t, p) = v;
            for (double v : tr.s_next) ref.data.at(row++, t, p) = v;
            ref.data.at(row, t, p) = tr.r;
        }
    }
    return ref;
}

EpisodeSequence extract_plane_episode(const ReferenceBuffer& ref, std::size_t plane) {
    if (plane >= ref.data.p) throw std::out_of_range("extract_plane_episode: plane out of range");
    const ComponentLayout& lo = ref.layout;
    std::vector<Transition> transitions;
    transitions.reserve(ref.data.h);
    for (std::size_t t = 0; t < ref.data.h; ++t) {
        Transition tr;
        for (std::size_t i = 0; i < lo.state_dim; ++i) tr.s.push_back(ref.data.at(i, t, plane));
        for (std::size_t i = 0; i < lo.action_dim; ++i)
            tr.a.push_back(ref.data.at(lo.action_row() + i, t, plane));
        for (std::size_t i = 0; i < lo.state_dim; ++i)
            tr.s_next.push_back(ref.data.at(lo.next_state_row() + i, t, plane));
        tr.r = ref.data.at(lo.reward_row(), t, plane);
        transitions.push_back(std::move(tr));
    }
    return make_episode(std::move(transitions));
}

DeviationBuffer squared_deviation(const ReferenceBuffer& ref) {
    const Tensor3& in = ref.data;
    Tensor3 out = Tensor3::zeros(in.d, in.h, in.p);
    const double inv_p = 1.0 / static_cast<double>(in.p);
    for (std::size_t i = 0; i < in.d; ++i) {
        for (std::size_t j = 0; j < in.h; ++j) {
            double mean = 0.0;
            for (std::size_t k = 0; k < in.p; ++k) mean += in.at(i, j, k);
            mean *= inv_p;
            for (std::size_t k = 0; k < in.p; ++k) {
                const double d = in.at(i, j, k) - mean;
                out.at(i, j, k) = d * d;
            }
        }
    }
    return out;
}

CollapsedBuffer collapse_components(const DeviationBuffer& dev, const ComponentLayout& layout) {
    if (dev.d != layout.rows())
        throw std::invalid_argument("collapse_components: tensor rows do not match layout");
    Tensor3 out = Tensor3::zeros(4, dev.h, dev.p);
    const std::size_t n = layout.state_dim, m = layout.action_dim;
    struct Group { std::size_t begin, count; };
    const Group groups[4] = {{0, n}, {layout.action_row(), m}, {layout.next_state_row(), n},
                             {layout.reward_row(), 1}};
    for (std::size_t g = 0; g < 4; ++g) {
        const double inv = 1.0 / static_cast<double>(groups[g].count);
        for (std::size_t j = 0; j < dev.h; ++j) {
            for (std::size_t k = 0; k < dev.p; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < groups[g].count; ++i)
                    acc += dev.at(groups[g].begin + i, j, k);
                out.at(g, j, k) = acc * inv;
            }
        }
    }
    return out;
}

std::vector<double> plane_scores(const CollapsedBuffer& col) {
    std::vector<double> scores(col.p, 0.0);
    for (std::size_t i = 0; i < col.d; ++i)
        for (std::size_t j = 0; j < col.h; ++j)
            for (std::size_t k = 0; k < col.p; ++k) scores[k] += col.at(i, j, k);
    return scores;
}

KMeansResult kmeans_1d(const std::vector<double>& scores, std::size_t k) {
    if (scores.empty()) throw std::invalid_argument("kmeans_1d: no points");
    if (k == 0) throw std::invalid_argument("kmeans_1d: k must be >= 1");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("kmeans_1d: non-finite score");

    // distinct sorted values with multiplicities
    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> vals;
    std::vector<double> wts;
    for (double v : sorted) {
        if (!vals.empty() && v == vals.back())
            wts.back() += 1.0;
        else {
            vals.push_back(v);
            wts.push_back(1.0);
        }
    }
    const std::size_t u = vals.size();
    const std::size_t kk = std::min(k, u);

    // weighted prefix sums for O(1) interval costs
    std::vector<double> pw(u + 1, 0.0), ps(u + 1, 0.0), ps2(u + 1, 0.0);
    for (std::size_t i = 0; i < u; ++i) {
        pw[i + 1] = pw[i] + wts[i];
        ps[i + 1] = ps[i] + wts[i] * vals[i];
        ps2[i + 1] = ps2[i] + wts[i] * vals[i] * vals[i];
    }
    auto interval_cost = [&](std::size_t a, std::size_t b) { // values [a, b)
        const double w = pw[b] - pw[a];
        const double s = ps[b] - ps[a];
        const double s2 = ps2[b] - ps2[a];
        return std::max(0.0, s2 - s * s / w);
    };

    // dp[c][j]: min cost of splitting values [0, j) into c+1 clusters
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(kk, std::vector<double>(u + 1, kInf));
    std::vector<std::vector<std::size_t>> cut(kk, std::vector<std::size_t>(u + 1, 0));
    for (std::size_t j = 1; j <= u; ++j) dp[0][j] = interval_cost(0, j);
    for (std::size_t c = 1; c < kk; ++c) {
        for (std::size_t j = c + 1; j <= u; ++j) {
            for (std::size_t i = c; i < j; ++i) { // last cluster is [i, j)
                const double cost = dp[c - 1][i] + interval_cost(i, j);
                if (cost < dp[c][j]) {
                    dp[c][j] = cost;
                    cut[c][j] = i;
                }
            }
        }
    }

    // backtrack cluster boundaries over the distinct values
    std::vector<std::size_t> bounds(kk + 1, 0);
    bounds[kk] = u;
    for (std::size_t c = kk; c-- > 1;) bounds[c] = cut[c][bounds[c + 1]];

    KMeansResult res;
    res.centroids.resize(kk);
    std::vector<int> value_cluster(u, 0);
    for (std::size_t c = 0; c < kk; ++c) {
        const std::size_t a = bounds[c], b = bounds[c + 1];
        res.centroids[c] = (ps[b] - ps[a]) / (pw[b] - pw[a]);
        for (std::size_t i = a; i < b; ++i) value_cluster[i] = static_cast<int>(c);
    }
    res.assignments.resize(scores.size());
    for (std::size_t p = 0; p < scores.size(); ++p) {
        const auto it = std::lower_bound(vals.begin(), vals.end(), scores[p]);
        res.assignments[p] = value_cluster[static_cast<std::size_t>(it - vals.begin())];
    }
    return res;
}

std::vector<std::size_t> select_representatives(const std::vector<double>& scores,
                                                const KMeansResult& clustering) {
    if (clustering.assignments.size() != scores.size())
        throw std::invalid_argument("select_representatives: assignment/score size mismatch");
    const std::size_t k = clustering.centroids.size();
    std::vector<std::size_t> reps(k, scores.size());
    std::vector<double> best(k, std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < scores.size(); ++p) {
        const int c = clustering.assignments[p];
        const double d = std::abs(scores[p] - clustering.centroids[static_cast<std::size_t>(c)]);
        if (d < best[static_cast<std::size_t>(c)]) { // strict: ties keep the lowest plane index
            best[static_cast<std::size_t>(c)] = d;
            reps[static_cast<std::size_t>(c)] = p;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        if (reps[c] == scores.size())
            throw std::logic_error("select_representatives: empty cluster");
    return reps;
}

EliteBuffer build_elite_buffer(const std::vector<const ReplayBuffer*>& member_buffers,
                               std::size_t per_member, std::size_t episodes_per_member,
                               const EnvSpec& spec, EliteTrace* trace) {
    const std::size_t M = episodes_per_member;
    if (M == 0) throw std::invalid_argument("build_elite_buffer: M must be >= 1");
    std::vector<PlaneProvenance> provenance;
    const std::vector<EpisodeSequence> episodes =
        select_top_episodes(member_buffers, per_member, &provenance);
    const ReferenceBuffer ref = build_reference_buffer(episodes, spec, provenance);
    const DeviationBuffer dev = squared_deviation(ref);
    const CollapsedBuffer col = collapse_components(dev, ref.layout);
    const std::vector<double> scores = plane_scores(col);
    const KMeansResult clustering = kmeans_1d(scores, M);
    std::vector<std::size_t> selected = select_representatives(scores, clustering);

    // fewer clusters than M: cycle the chosen indices in ascending order
    if (selected.size() < M) {
        std::vector<std::size_t> pool(selected);
        std::sort(pool.begin(), pool.end());
        std::size_t i = 0;
        while (selected.size() < M) selected.push_back(pool[i++ % pool.size()]);
    }

    EliteBuffer elite;
    elite.source_indices = selected;
    elite.episodes.reserve(M);
    for (std::size_t p : selected) elite.episodes.push_back(episodes[p]);

    if (trace) {
        trace->provenance = ref.provenance;
        trace->scores = scores;
        trace->assignments = clustering.assignments;
        trace->selected = selected;
    }
    return elite;
}

} // namespace edrl
