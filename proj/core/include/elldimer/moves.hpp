// Elementary transformations of finite weighted bipartite patches:
// shrinking/expanding 2-valent vertices and spider moves, with weight
// updates, face-weight bookkeeping, and brute-force partition-function
// oracles.

#ifndef ELLDIMER_MOVES_HPP
#define ELLDIMER_MOVES_HPP

#include <memory>

#include "elldimer/kasteleyn.hpp"

namespace elldimer {

// A finite planar bipartite graph with complex edge weights, cut from a
// periodic cover or built directly.  Rewiring moves produce new patches; the
// embedded combinatorics are revalidated through the usual face tracing.
class FinitePatch {
public:
    FinitePatch(GraphSpec spec, std::vector<cx> weights);

    // Cut the window |mx|,|my| <= radius from a weight system's cover.
    // Records the per-edge crossing angles and the Abel-map values needed to
    // put spider gadgets in normal form.
    static FinitePatch from_cover(const WeightSystem& ws, int radius);
    // Induced patch on an explicit set of cover vertices (id, translate).
    static FinitePatch from_cover_subset(const WeightSystem& ws,
                                         const std::vector<std::pair<int, Offset>>& verts);

    const BipartiteGraph& graph() const { return *graph_; }
    const std::vector<cx>& weights() const { return weights_; }
    cx weight(int e) const { return weights_[e]; }

    int num_white() const;
    int num_black() const;

    // Brute-force dimer partition function  sum_M prod |w_e|.
    double z_enumeration() const;
    // Phased sum  sum_M prod K_e (complex).
    cx z_phased_enumeration() const;
    // Lexicographically first perfect matching, as a sorted edge list.
    std::vector<int> reference_matching() const;
    // |det K| on balanced patches.
    double z_determinant() const;
    // P(edge) by enumeration / by the finite determinantal formula.
    double edge_probability_enumeration(int e) const;
    double edge_probability_determinant(int e) const;

    // Alternating face weight (numerator on white-to-black boundary
    // half-edges).
    cx face_weight(int f) const;
    // Key identifying a face across moves: the sorted ids of its boundary
    // edges that are untouched by the move.
    std::vector<int> face_key(int f, const std::vector<int>& touched) const;

    // Optional metadata for Fock-weighted patches.
    struct EdgeAngles {
        double alpha = 0, beta = 0;
    };
    std::vector<EdgeAngles> edge_angles;            // empty if unknown
    std::vector<std::array<double, 2>> edge_face_eta; // cover Abel values (left, right)
    std::map<int, std::vector<double>> white_faces_eta; // per white: its 3+ face values
    std::vector<double> vertex_eta;                 // Abel map on vertices
    const EllipticParams* params = nullptr;
    cx t = 0;
    std::optional<cx> normal_form_s; // spider normal-form parameter

    void copy_metadata(const FinitePatch& from) {
        edge_angles = from.edge_angles;
        edge_face_eta = from.edge_face_eta;
        white_faces_eta = from.white_faces_eta;
        vertex_eta = from.vertex_eta;
        params = from.params;
        t = from.t;
        normal_form_s = from.normal_form_s;
    }

    GraphSpec spec;

private:
    std::vector<cx> weights_;
    std::shared_ptr<const BipartiteGraph> graph_;
};

struct MoveRecord {
    std::string type;
    std::vector<int> touched; // edge ids rewired by the move
    // Face weights before/after, keyed by the boundary edges untouched by the
    // move; the moved faces carry the special keys {-1} (central) etc.
    std::vector<std::pair<std::vector<int>, cx>> faces_before, faces_after;
    double z_factor = 1; // Z_after = z_factor * Z_before for matched gauges
    double residual = 0; // worst precondition residual
};

// Shrinks a 2-valent vertex v (of either color); requires K1 + K2 = 0 up to
// 1e-10 relative (automatic for Fock weights).
std::pair<FinitePatch, MoveRecord> shrink_2valent(const FinitePatch& patch, int v);

// Expands black vertex b into b1 - w* - b2, splitting its rotation after
// positions k1 and k2 (arc [k1+1..k2] goes to b1); new edge weights +-1.
std::pair<FinitePatch, MoveRecord> expand_2valent(const FinitePatch& patch, int b, int k1,
                                                  int k2);

// Applies the white-vertex gauge of the spider normal form at the listed
// trivalent whites: each row is multiplied by the product of
// theta(t + eta(f)) over the three adjacent faces (requires Fock metadata).
FinitePatch gauge_spider_normal_form(const FinitePatch& patch, const std::vector<int>& whites,
                                     double* gauge_abs = nullptr);

// Spider move at a quadrilateral face whose two white vertices are trivalent
// and whose weights are in the antisymmetric normal form F_s(beta, alpha) =
// theta(beta-alpha) theta(s-alpha-beta) for a common s.  Verifies the five
// face-weight relations W' = 1/W, W'_{1,3} = W_{1,3}(1+W),
// W'_{2,4} = W_{2,4}/(1+1/W).
std::pair<FinitePatch, MoveRecord> spider_move(const FinitePatch& patch, int face);

struct PartitionInvariance {
    double z_before = 0, z_after = 0;
    double relative_gap = 0; // |Z_after - z_factor Z_before| / Z_after
    double det_gap_before = 0, det_gap_after = 0; // |Z_enum - |det K|| / Z
    // Height-function (face-weight) form: sum_M w(M)/w(M1) with corresponding
    // reference matchings; the spider invariant.
    double hf_before = 0, hf_after = 0, hf_gap = 0;
    double hf_det_before = 0, hf_det_after = 0, hf_det_gap = 0;
};

PartitionInvariance partition_invariance(const FinitePatch& before, const FinitePatch& after,
                                         const MoveRecord& record);

} // namespace elldimer

#endif
