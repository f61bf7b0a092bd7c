// Combinatorial layer: bipartite graphs with rotation systems, given either
// as a Z^2-periodic fundamental domain (edges carry translation offsets) or
// as finite planar patches.  Faces are traced from the rotation system,
// quadrilaterals of the quad-graph correspond to edges, and train-tracks are
// walked as chains of quads entered and exited through opposite sides.
// Tracks come consistently oriented with black vertices on the right; in the
// periodic case each track orbit carries a homology class (h, v) in Z^2.

#ifndef ELLDIMER_GRAPH_HPP
#define ELLDIMER_GRAPH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace elldimer {

struct Offset {
    int x = 0;
    int y = 0;
    friend Offset operator+(Offset a, Offset b) { return {a.x + b.x, a.y + b.y}; }
    friend Offset operator-(Offset a, Offset b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Offset a, Offset b) { return a.x == b.x && a.y == b.y; }
    friend auto operator<=>(Offset a, Offset b) = default;
};

struct GraphSpec {
    std::string name;
    std::vector<char> color;            // per vertex id: 'w' or 'b'
    struct Edge {
        int w = 0, b = 0;               // vertex ids
        Offset off;                     // w@(0,0) is adjacent to b@off
    };
    std::vector<Edge> edges;
    // CCW cyclic order of incident edge ids at each vertex; if empty, the
    // order of appearance in `edges` is used.
    std::vector<std::vector<int>> rotation;
    bool periodic = true;
    // For finite specs: a half-edge (edge id, dir) on the outer face;
    // dir 0 = w->b, 1 = b->w.  If absent the longest face is taken.
    std::optional<std::pair<int, int>> outer_half_edge;

    static GraphSpec builtin(const std::string& name);
    static GraphSpec from_json_text(const std::string& text);
    std::string to_json_text() const;

    // Quotient by the sublattice spanned by v1, v2 (positive determinant):
    // the new fundamental domain carries det(v1,v2) copies of this one.
    GraphSpec relattice(Offset v1, Offset v2) const;
};

// A corner of a traced face: sits between two consecutive boundary
// half-edges, at a primal vertex; corners are exactly the quad-graph edges
// (vertex, face).
struct Corner {
    int face = -1;
    int pos = -1;   // corner between half-edge pos and pos+1 of the face
    friend bool operator==(const Corner&, const Corner&) = default;
};

struct TrackStep {
    int edge = -1;  // quad crossed
    int pair = -1;  // 0: enters (b,f') exits (w,f); 1: enters (f',w) exits (f,b)
    Offset at;      // offset of the edge's white endpoint for this step
};

struct TrainTrack {
    int id = -1;
    std::vector<TrackStep> steps; // cyclic for periodic graphs, a strip otherwise
    bool closed = true;
    Offset homology;              // (h, v); periodic case only
};

struct MinimalityViolation {
    std::string reason;
    int track_a = -1, track_b = -1;
    std::vector<int> quads;       // offending quad edges
};

struct MinimalityCertificate {
    bool minimal = true;
    std::vector<MinimalityViolation> violations;
    int scan_window = 0;          // lift window used for the bigon scan

    // Convenience accessors for the first violation.
    std::string reason() const { return violations.empty() ? "" : violations.front().reason; }
    int track_a() const { return violations.empty() ? -1 : violations.front().track_a; }
    int track_b() const { return violations.empty() ? -1 : violations.front().track_b; }
};

class BipartiteGraph {
public:
    explicit BipartiteGraph(GraphSpec spec);

    const GraphSpec& spec() const { return spec_; }
    bool periodic() const { return spec_.periodic; }
    int num_vertices() const { return static_cast<int>(spec_.color.size()); }
    int num_edges() const { return static_cast<int>(spec_.edges.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }
    char color(int v) const { return spec_.color[v]; }
    const GraphSpec::Edge& edge(int e) const { return spec_.edges[e]; }

    // Half-edge h = 2*e + d; d = 0 traverses w->b, d = 1 traverses b->w.
    int half_edges() const { return 2 * num_edges(); }
    int tail(int h) const;
    int head(int h) const;
    Offset half_edge_offset(int h) const; // head position minus tail position

    struct Face {
        std::vector<int> boundary;        // half-edges, CCW (interior left)
        std::vector<Offset> head_offset;  // offset of head(boundary[k]) w.r.t. face base
        bool outer = false;
    };
    const Face& face(int f) const { return faces_[f]; }
    int face_of(int h) const { return face_of_[h]; }
    int pos_in_face(int h) const { return pos_in_face_[h]; }

    // Faces left/right of the w->b half-edge of e ("f" and "f'" of the rhombus),
    // with the offset of the face base relative to the edge's white endpoint.
    int face_left(int e) const { return face_of_[2 * e]; }
    int face_right(int e) const { return face_of_[2 * e + 1]; }
    Offset face_left_base(int e) const;
    Offset face_right_base(int e) const;

    // Vertex at a corner and the two edges meeting there.
    int corner_vertex(const Corner& c) const;
    std::array<int, 2> corner_edges(const Corner& c) const;
    // Offset of the corner vertex relative to the face base.
    Offset corner_vertex_offset(const Corner& c) const;

    // The four corners of quad e: sides (w,f), (f,b), (w,f'), (b,f').
    Corner side_wf(int e) const;
    Corner side_fb(int e) const;
    Corner side_wfp(int e) const;
    Corner side_bfp(int e) const;

    const std::vector<TrainTrack>& tracks() const { return tracks_; }
    // Track crossing quad e as pair 0 (the "beta" slot) / pair 1 ("alpha" slot).
    int track_beta(int e) const { return quad_track_[e][0]; }
    int track_alpha(int e) const { return quad_track_[e][1]; }

    // Track crossing a given corner (every corner is crossed by exactly one).
    int corner_track(const Corner& c) const;
    // Pair slot (0/1) that the corner plays for a given incident quad.
    int corner_pair_for(const Corner& c, int e) const;

    MinimalityCertificate check_minimal() const;

    // All corners at a primal vertex, as (corner, face, offset of face base
    // relative to the vertex).
    struct VertexCorner {
        Corner corner;
        int face;
        Offset face_base; // position of face base relative to the vertex
    };
    const std::vector<VertexCorner>& corners_at(int v) const { return corners_at_[v]; }

    // Incident edges at v in CCW rotation order.
    const std::vector<int>& edge_rotation(int v) const { return rotation_[v]; }
    int rotation_index(int v, int e) const { return rot_index_[v][e]; }

private:
    void trace_faces();
    void walk_tracks();

    GraphSpec spec_;
    std::vector<std::vector<int>> rotation_;          // per vertex
    std::vector<std::vector<int>> rot_index_;         // per vertex: edge -> position
    std::vector<Face> faces_;
    std::vector<int> face_of_, pos_in_face_;
    std::vector<TrainTrack> tracks_;
    std::vector<std::array<int, 2>> quad_track_;      // per edge: track ids (pair0, pair1)
    std::vector<std::vector<VertexCorner>> corners_at_;
};

// Vertex of the quad-graph of the universal cover (periodic case) or of the
// plane graph itself (finite case): a primal vertex or a face, translated.
struct CoverNode {
    bool is_face = false;
    int id = -1;
    Offset at;
    friend bool operator==(const CoverNode&, const CoverNode&) = default;
};

struct CoverNodeHash {
    size_t operator()(const CoverNode& n) const {
        uint64_t h = (uint64_t)(uint32_t)n.id;
        h = h * 1000003u ^ (uint64_t)(uint32_t)(n.at.x + (1 << 20));
        h = h * 1000003u ^ (uint64_t)(uint32_t)(n.at.y + (1 << 20));
        h = h * 1000003u ^ (n.is_face ? 0x9e3779b9u : 0x85ebca6bu);
        return (size_t)h;
    }
};

inline CoverNode cover_vertex(int v, Offset at = {}) { return {false, v, at}; }
inline CoverNode cover_face(int f, Offset at = {}) { return {true, f, at}; }

// A quad-graph edge on the cover, with the crossing-track data needed by the
// discrete Abel map and the kernel functions.
struct QuadEdge {
    CoverNode to;
    int track = -1;      // track orbit crossing this corner
    int quad = -1;       // one incident quad (edge id)
    int sign = 0;        // +1 if walking this direction adds the track angle
};

// Enumerates quad-graph neighbors of a cover node.
std::vector<QuadEdge> quad_neighbors(const BipartiteGraph& g, const CoverNode& n);

// Half-angle map: one lift in [0, pi) per track orbit, optionally an exact
// rational multiple of pi (p/q) for exact cyclic-order checks.
struct HalfAngleMap {
    std::vector<double> alpha;                         // per track id
    std::vector<std::optional<std::pair<long, long>>> rational; // alpha = (p/q) pi

    double angle(int track) const { return alpha[track]; }
};

struct AngleMapCheck {
    bool ok = true;
    std::string violation;
    int track_a = -1, track_b = -1;
};

// Monotonicity of alpha w.r.t. the cyclic order of homology classes, plus
// distinctness for intersecting / anti-parallel pairs.  Periodic graphs only.
AngleMapCheck check_half_angle_map(const BipartiteGraph& g, const HalfAngleMap& alpha);

// Discrete Abel map eta on the quad-graph of the cover; lazily grown BFS from
// the base node, storing the formal integer combination of track angles.
class AbelMap {
public:
    AbelMap(const BipartiteGraph& g, const HalfAngleMap& alpha, CoverNode base);

    struct Value {
        std::map<int, int> formal; // track id -> integer coefficient
        double value = 0;          // sum of coefficients times angle lifts
    };
    const Value& at(const CoverNode& n) const;
    double value(const CoverNode& n) const { return at(n).value; }

    const BipartiteGraph& graph() const { return g_; }
    const HalfAngleMap& angles() const { return alpha_; }
    CoverNode base() const { return base_; }

private:
    void grow_to(const CoverNode& n) const;

    const BipartiteGraph& g_;
    const HalfAngleMap& alpha_;
    CoverNode base_;
    mutable std::unordered_map<CoverNode, Value, CoverNodeHash> values_;
    mutable std::vector<CoverNode> frontier_;
};

// Shortest path between two cover nodes in the quad-graph (BFS, lowest-id
// tie-breaking, deterministic).
std::vector<CoverNode> quad_path(const BipartiteGraph& g, CoverNode from, CoverNode to);
int quad_distance(const BipartiteGraph& g, CoverNode from, CoverNode to);

} // namespace elldimer

#endif
