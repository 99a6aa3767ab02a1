#pragma once

#include <cstddef>
#include <vector>

#include "edrl/drl_agents.hpp"
#include "edrl/envs.hpp"

namespace edrl {

// Dense 3-D tensor, shape D x H x P, indexed (component row, step, plane).
struct Tensor3 {
    std::size_t d = 0, h = 0, p = 0;
    std::vector<double> values;

    static Tensor3 zeros(std::size_t d_, std::size_t h_, std::size_t p_) {
        return {d_, h_, p_, std::vector<double>(d_ * h_ * p_, 0.0)};
    }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return values[(i * h + j) * p + k]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return values[(i * h + j) * p + k]; }
};

// Row ranges of the transition quadruple inside a D-row column:
// state rows [0,n), action rows [n,n+m), next-state rows [n+m,2n+m),
// reward row 2n+m. D = 2n + m + 1.
struct ComponentLayout {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;

    std::size_t rows() const { return 2 * state_dim + action_dim + 1; }
    std::size_t action_row() const { return state_dim; }
    std::size_t next_state_row() const { return state_dim + action_dim; }
    std::size_t reward_row() const { return 2 * state_dim + action_dim; }
};

struct PlaneProvenance {
    std::size_t member = 0;        // index into the member-buffer list
    std::size_t episode_index = 0; // position in that member's buffer
    double total_reward = 0.0;
};

// P selected episodes stacked as planes: column (.,t,p) holds transition t
// of episode p as [s; a; s_next; r].
struct ReferenceBuffer {
    Tensor3 data;
    std::vector<PlaneProvenance> provenance;
    ComponentLayout layout;
};

using DeviationBuffer = Tensor3; // D x H x P, elementwise squared deviation from the plane mean
using CollapsedBuffer = Tensor3; // 4 x H x P, component-averaged deviations

struct KMeansResult {
    std::vector<int> assignments;   // cluster id per input point, ids ordered by ascending centroid
    std::vector<double> centroids;  // may be shorter than k when there are fewer distinct values
};

// The M most-different high-reward episodes, untransformed and trainable.
struct EliteBuffer {
    std::vector<EpisodeSequence> episodes;
    std::vector<std::size_t> source_indices; // plane index per episode
};

// Per-generation diagnostics of the selection pipeline (debug dump).
struct EliteTrace {
    std::vector<PlaneProvenance> provenance;
    std::vector<double> scores;
    std::vector<int> assignments;
    std::vector<std::size_t> selected;
};

// Top per_member episodes of each member by total reward (ties: newer
// first). Output is member-major, descending reward within a member.
std::vector<EpisodeSequence> select_top_episodes(const std::vector<const ReplayBuffer*>& member_buffers,
                                                 std::size_t per_member,
                                                 std::vector<PlaneProvenance>* provenance = nullptr);

ReferenceBuffer build_reference_buffer(const std::vector<EpisodeSequence>& episodes, const EnvSpec& spec,
                                       std::vector<PlaneProvenance> provenance = {});

// Reconstructs episode p from its plane (exact inverse of the stacking).
EpisodeSequence extract_plane_episode(const ReferenceBuffer& ref, std::size_t plane);

// out[d,t,p] = (ref[d,t,p] - mean_p' ref[d,t,p'])^2. The reference buffer is
// left untouched; the transform only feeds the difference scores.
DeviationBuffer squared_deviation(const ReferenceBuffer& ref);

// Averages each multi-row component group down to one row:
// [state mean, action mean, next-state mean, reward].
CollapsedBuffer collapse_components(const DeviationBuffer& dev, const ComponentLayout& layout);

// Sum of all 4*H elements of each plane; one difference score per episode.
std::vector<double> plane_scores(const CollapsedBuffer& col);

// Exact 1-D k-means: dynamic programming over contiguous partitions of the
// sorted distinct values (weighted by multiplicity). When there are fewer
// distinct values than k, that many clusters are formed.
KMeansResult kmeans_1d(const std::vector<double>& scores, std::size_t k);

// One plane per cluster, nearest score to the centroid; ties go to the
// lowest plane index. Ordered by ascending centroid.
std::vector<std::size_t> select_representatives(const std::vector<double>& scores,
                                                const KMeansResult& clustering);

// Full pipeline: top episodes -> reference buffer -> squared deviation ->
// component collapse -> plane scores -> k-means (k = M) -> representatives.
// Degenerate clusterings are padded back to M by cycling the selected
// indices in ascending order, so the result always holds M episodes.
EliteBuffer build_elite_buffer(const std::vector<const ReplayBuffer*>& member_buffers,
                               std::size_t per_member, std::size_t episodes_per_member,
                               const EnvSpec& spec, EliteTrace* trace = nullptr);

} // namespace edrl
