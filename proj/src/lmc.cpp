#include "linlam/lmc.hpp"

#include <numeric>
#include <sstream>

namespace linlam {

Rational ProbPolicy<Rational>::from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return rational_from_double(j.get<double>());
    if (j.is_string()) return rational_from_string(j.get<std::string>());
    throw InputError("probability must be an integer, a decimal or a \"num/den\" string");
}

nlohmann::json ProbPolicy<Rational>::to_json(const Rational& p) {
    return rational_to_string(p);
}

double ProbPolicy<double>::from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return rational_to_double(rational_from_string(j.get<std::string>()));
    throw InputError("probability must be an integer, a decimal or a \"num/den\" string");
}

std::string ProbPolicy<double>::to_string(double p) {
    std::ostringstream os;
    os.precision(12);
    os << p;
    return os.str();
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

std::vector<int> equivalence_classes(int n, const std::vector<std::pair<int, int>>& pairs) {
    UnionFind uf(n);
    for (const auto& [a, b] : pairs) uf.unite(a, b);
    std::map<int, int> renum;
    std::vector<int> out(n);
    for (int s = 0; s < n; ++s) {
        auto [it, fresh] = renum.try_emplace(uf.find(s), static_cast<int>(renum.size()));
        (void)fresh;
        out[s] = it->second;
    }
    return out;
}

std::vector<std::vector<char>> preorder_closure(int n,
                                                const std::vector<std::pair<int, int>>& pairs) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : pairs) adj[a].push_back(b);
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int s = 0; s < n; ++s) {
        std::vector<int> stack{s};
        reach[s][s] = 1;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (int b : adj[a]) {
                if (!reach[s][b]) {
                    reach[s][b] = 1;
                    stack.push_back(b);
                }
            }
        }
    }
    return reach;
}

} // namespace linlam
