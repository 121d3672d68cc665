#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lattree/rng.hpp"

namespace lattree {

// Finite connected subgraph of Z^d with spread-out edges (||x-y||_inf <= L),
// rooted at the origin (vertex 0).
struct LatticeGraph {
    int d = 1;
    int L = 1;
    std::vector<std::vector<int>> coords; // coords[v] has d entries; coords[0] = 0
    std::vector<std::pair<int, int>> edges; // unordered vertex-index pairs
    std::vector<std::vector<int>> adj;

    int num_vertices() const { return static_cast<int>(coords.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    bool is_tree() const { return num_edges() + 1 == num_vertices(); }
    void build_adjacency();
    void validate() const; // connectivity, origin, spread-out constraint
};

// Acyclic specialization; produced by the surrogate sampler and enumeration.
struct LatticeTree : LatticeGraph {
    std::vector<int> parent; // parent[0] = -1
    int height = 0;          // max graph distance from the root
    int site_collisions = 0; // vertex pairs mapped to the same lattice site
};

struct WalkPath {
    std::vector<int> positions; // vertex indices; starts at the root
};

// Gibbs weight (z / ((2L)^d - 1))^{|E|}
double weight(const LatticeTree& tree, double z);

// All lattice trees containing the origin with at most max_edges edges,
// paired with their weight at z. Throws when more than budget trees appear.
std::vector<std::pair<LatticeTree, double>>
enumerate_small_trees(int d, int L, int max_edges, double z,
                      std::size_t budget = 2'000'000);

struct SurrogateParams {
    int n = 50;            // scale
    double h = 1.0;        // height conditioning: H >= ceil(h * n)
    int d = 4;
    int L = 1;
    std::string offspring = "geometric"; // critical: geometric(1/2) or poisson(1)
    std::size_t max_vertices = 2'000'000; // per-attempt size cap
    std::size_t max_attempts = 1'000'000;
};

// Critical Galton-Watson tree conditioned on height >= ceil(h*n) by
// rejection, embedded by iid displacements uniform on [-L,L]^d \ {0}.
LatticeTree sample_surrogate(const SurrogateParams& p, Rng& rng);

// simple random walk from the root, uniform neighbor choice
WalkPath srw(const LatticeGraph& graph, std::size_t steps, Rng& rng);

// BFS graph distance (edge count); -1 if unreachable
int graph_distance(const LatticeGraph& graph, int x, int y);

// Unit-conductance effective resistance. Acyclic graphs take the exact
// shortcut R = graph distance; cyclic graphs solve the Laplacian system.
double effective_resistance(const LatticeGraph& graph, int x, int y);

std::string serialize(const LatticeGraph& g);
LatticeGraph deserialize_graph(const std::string& text);

} // namespace lattree
