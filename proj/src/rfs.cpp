#include "etpmb/rfs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace etpmb {

double PoissonIntensity::mass() const {
    double total = 0.0;
    for (const auto& c : components) total += c.w;
    return total;
}

double PMBState::expected_cardinality() const {
    double total = ppp.mass();
    for (const auto& b : bernoullis) total += b.r;
    return total;
}

Bernoulli bernoulli_mixture_reduce(std::span<const WeightedBernoulli> mix, double absent_weight,
                                   double tau_g) {
    if (mix.empty()) throw DomainError("bernoulli_mixture_reduce: empty mixture");
    double total = absent_weight;
    double existence = 0.0;
    std::size_t best = 0;
    std::vector<WeightedGGIW> densities;
    densities.reserve(mix.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
        total += mix[i].w;
        existence += mix[i].w * mix[i].bern->r;
        if (mix[i].w > mix[best].w) best = i;
        densities.push_back({mix[i].w * mix[i].bern->r, &mix[i].bern->density});
    }
    Bernoulli out;
    out.track_id = mix[best].bern->track_id;
    if (!(total > 0.0) || !(existence > 0.0)) {
        out.r = 0.0;
        out.density = mix[best].bern->density;
        return out;
    }
    out.r = std::clamp(existence / total, 0.0, 1.0);
    out.density = ggiw_mixture_merge(densities, tau_g);
    return out;
}

PMBState recycle(const PMBState& state, double tau_r) {
    PMBState out;
    out.ppp = state.ppp;
    out.next_track_id = state.next_track_id;
    for (const auto& b : state.bernoullis) {
        if (b.r < tau_r) {
            out.ppp.components.push_back({b.r, b.density});
        } else {
            out.bernoullis.push_back(b);
        }
    }
    return out;
}

PMBState prune_state(const PMBState& state, double bern_floor, double ppp_floor,
                     std::size_t max_ppp) {
    PMBState out;
    out.next_track_id = state.next_track_id;
    for (const auto& b : state.bernoullis) {
        if (!(b.r < bern_floor)) out.bernoullis.push_back(b);
    }
    for (const auto& c : state.ppp.components) {
        if (!(c.w < ppp_floor)) out.ppp.components.push_back(c);
    }
    if (out.ppp.components.size() > max_ppp) {
        std::stable_sort(out.ppp.components.begin(), out.ppp.components.end(),
                         [](const PoissonComponent& x, const PoissonComponent& y) {
                             return x.w > y.w;
                         });
        out.ppp.components.resize(max_ppp);
    }
    return out;
}

namespace {

void put(std::ostream& os, double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    os << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
}

void write_density(std::ostream& os, const GGIWDensity& g) {
    put(os, g.gamma.a);
    put(os, g.gamma.b);
    for (Eigen::Index i = 0; i < g.kin.m.size(); ++i) put(os, g.kin.m(i));
    for (Eigen::Index i = 0; i < g.kin.P.rows(); ++i)
        for (Eigen::Index j = 0; j < g.kin.P.cols(); ++j) put(os, g.kin.P(i, j));
    put(os, g.ext.v);
    for (Eigen::Index i = 0; i < g.ext.V.rows(); ++i)
        for (Eigen::Index j = 0; j < g.ext.V.cols(); ++j) put(os, g.ext.V(i, j));
}

GGIWDensity read_density(std::istream& is, int nx, int d) {
    GGIWDensity g;
    is >> g.gamma.a >> g.gamma.b;
    g.kin.m.resize(nx);
    for (int i = 0; i < nx; ++i) is >> g.kin.m(i);
    g.kin.P.resize(nx, nx);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j) is >> g.kin.P(i, j);
    is >> g.ext.v;
    g.ext.V.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) is >> g.ext.V(i, j);
    return g;
}

} // namespace

void write_state(std::ostream& os, const PMBState& state) {
    int nx = 0;
    int d = 0;
    if (!state.bernoullis.empty()) {
        nx = state.bernoullis.front().density.state_dim();
        d = state.bernoullis.front().density.extent_dim();
    } else if (!state.ppp.components.empty()) {
        nx = state.ppp.components.front().density.state_dim();
        d = state.ppp.components.front().density.extent_dim();
    }
    os << "pmb_state " << nx << ' ' << d << ' ' << state.next_track_id << '\n';
    for (const auto& b : state.bernoullis) {
        os << 'B';
        put(os, b.r);
        write_density(os, b.density);
        os << ' ' << b.track_id << '\n';
    }
    for (const auto& c : state.ppp.components) {
        os << 'P';
        put(os, c.w);
        write_density(os, c.density);
        os << '\n';
    }
}

PMBState read_state(std::istream& is) {
    std::string tag;
    int nx = 0;
    int d = 0;
    PMBState state;
    if (!(is >> tag >> nx >> d >> state.next_track_id) || tag != "pmb_state") {
        throw DomainError("read_state: missing pmb_state header");
    }
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        char role = 0;
        ls >> role;
        if (role == 'B') {
            Bernoulli b;
            ls >> b.r;
            b.density = read_density(ls, nx, d);
            ls >> b.track_id;
            state.bernoullis.push_back(std::move(b));
        } else if (role == 'P') {
            PoissonComponent c;
            ls >> c.w;
            c.density = read_density(ls, nx, d);
            state.ppp.components.push_back(std::move(c));
        } else {
            throw DomainError("read_state: unknown role tag");
        }
        if (ls.fail()) throw DomainError("read_state: malformed record");
    }
    return state;
}

} // namespace etpmb
