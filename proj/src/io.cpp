#include "zgcnet/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include "zgcnet/error.hpp"

namespace zgcnet {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

long long parse_int(const std::string& field, std::size_t line) {
    const std::string f = trim(field);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw ParseError(line, "expected an integer, got '" + f + "'");
    return v;
}

double parse_double(const std::string& field, std::size_t line) {
    const std::string f = trim(field);
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw ParseError(line, "expected a finite number, got '" + f + "'");
    return v;
}

// Calls fn(fields, line) for each data row; skips blanks, comments and a header.
template <class Fn>
std::size_t for_each_row(std::istream& is, Fn&& fn) {
    std::string raw;
    std::size_t line = 0, rows = 0;
    bool first = true;
    while (std::getline(is, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (first && (std::isalpha(static_cast<unsigned char>(s[0])))) {
            first = false;
            continue;
        }
        first = false;
        fn(split(s, ','), line);
        ++rows;
    }
    return rows;
}

std::ostream& exact(std::ostream& os) { return os << std::setprecision(std::numeric_limits<double>::max_digits10); }

}  // namespace

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

DynamicNetwork read_snapshot_csv(std::istream& is, std::size_t universe) {
    struct Row {
        long long t, u, v;
        double w;
        std::size_t line;
    };
    std::vector<Row> rows;
    const std::size_t n = for_each_row(is, [&](const std::vector<std::string>& f, std::size_t line) {
        if (f.size() != 4) throw ParseError(line, "expected 4 fields `t,u,v,w`");
        Row r{parse_int(f[0], line), parse_int(f[1], line), parse_int(f[2], line), parse_double(f[3], line), line};
        if (r.t < 1) throw ParseError(line, "snapshot index must be >= 1");
        if (r.u < 0 || r.v < 0) throw ParseError(line, "node ids must be nonnegative");
        if (r.w < 0) throw ParseError(line, "weight must be nonnegative");
        if (r.u == r.v && r.w != 0) throw ParseError(line, "self-loop with nonzero weight");
        rows.push_back(r);
    });
    if (n == 0) throw InvalidInput("snapshot CSV has no rows");
    long long tmin = rows.front().t, tmax = rows.front().t, umax = 0;
    for (const auto& r : rows) {
        tmin = std::min(tmin, r.t);
        tmax = std::max(tmax, r.t);
        umax = std::max({umax, r.u, r.v});
    }
    if (universe == 0) universe = static_cast<std::size_t>(umax) + 1;
    std::vector<Snapshot> snaps;
    for (long long t = tmin; t <= tmax; ++t) snaps.emplace_back(static_cast<int>(t), universe);
    std::set<std::tuple<long long, long long, long long>> seen;
    for (const auto& r : rows) {
        Snapshot& s = snaps[static_cast<std::size_t>(r.t - tmin)];
        try {
            if (r.u != r.v && r.w > 0 && !seen.insert({r.t, std::min(r.u, r.v), std::max(r.u, r.v)}).second)
                throw ParseError(r.line, "duplicate edge");
            s.add_node(static_cast<NodeId>(r.u));
            s.add_node(static_cast<NodeId>(r.v));
            if (r.u != r.v) s.set_weight(static_cast<NodeId>(r.u), static_cast<NodeId>(r.v), r.w);
        } catch (const InvalidInput& e) {
            throw ParseError(r.line, e.what());
        }
    }
    return DynamicNetwork(std::move(snaps));
}

void write_snapshot_csv(std::ostream& os, const DynamicNetwork& net) {
    exact(os) << "t,u,v,w\n";
    for (const auto& s : net.snapshots()) {
        std::set<NodeId> covered;
        for (const auto& [e, w] : s.edges()) {
            os << s.index() << ',' << e.u << ',' << e.v << ',' << w << '\n';
            covered.insert(e.u);
            covered.insert(e.v);
        }
        for (NodeId v : s.nodes())
            if (!covered.count(v)) os << s.index() << ',' << v << ',' << v << ",0\n";
    }
}

FeatureSeries read_feature_csv(std::istream& is) {
    struct Row {
        long long t, node;
        std::vector<double> f;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::size_t width = 0;
    for_each_row(is, [&](const std::vector<std::string>& f, std::size_t line) {
        if (f.size() < 3) throw ParseError(line, "expected `t,node,f1,...`");
        if (width == 0) width = f.size() - 2;
        if (f.size() - 2 != width) throw ParseError(line, "inconsistent feature count");
        Row r{parse_int(f[0], line), parse_int(f[1], line), {}, line};
        if (r.t < 1 || r.node < 0) throw ParseError(line, "t must be >= 1 and node >= 0");
        for (std::size_t k = 2; k < f.size(); ++k) r.f.push_back(parse_double(f[k], line));
        rows.push_back(std::move(r));
    });
    if (rows.empty()) throw InvalidInput("feature CSV has no rows");
    long long tmax = 0, nmax = 0;
    for (const auto& r : rows) {
        tmax = std::max(tmax, r.t);
        nmax = std::max(nmax, r.node);
    }
    FeatureSeries fs(static_cast<std::size_t>(tmax), static_cast<std::size_t>(nmax) + 1, width);
    std::vector<char> filled(fs.steps() * fs.nodes(), 0);
    for (const auto& r : rows) {
        const std::size_t t = static_cast<std::size_t>(r.t - 1), n = static_cast<std::size_t>(r.node);
        char& flag = filled[t * fs.nodes() + n];
        if (flag) throw ParseError(r.line, "duplicate (t, node) row");
        flag = 1;
        for (std::size_t k = 0; k < width; ++k) fs.at(t, n, k) = r.f[k];
    }
    for (std::size_t i = 0; i < filled.size(); ++i)
        if (!filled[i])
            throw InvalidInput("feature CSV misses t=" + std::to_string(i / fs.nodes() + 1) +
                               " node=" + std::to_string(i % fs.nodes()));
    return fs;
}

void write_feature_csv(std::ostream& os, const FeatureSeries& series) {
    exact(os) << "t,node";
    for (std::size_t k = 0; k < series.features(); ++k) os << ",f" << k + 1;
    os << '\n';
    for (std::size_t t = 0; t < series.steps(); ++t)
        for (std::size_t n = 0; n < series.nodes(); ++n) {
            os << t + 1 << ',' << n;
            for (std::size_t k = 0; k < series.features(); ++k) os << ',' << series.at(t, n, k);
            os << '\n';
        }
}

void write_zpd_csv(std::ostream& os, const ZPD& zpd) {
    os << "p,twice_birth,twice_death\n";
    for (const auto& p : zpd.points()) os << p.dim << ',' << p.birth.twice << ',' << p.death.twice << '\n';
}

ZPD read_zpd_csv(std::istream& is) {
    std::vector<PersistencePoint> pts;
    for_each_row(is, [&](const std::vector<std::string>& f, std::size_t line) {
        if (f.size() != 3) throw ParseError(line, "expected `p,twice_birth,twice_death`");
        PersistencePoint p{static_cast<int>(parse_int(f[0], line)), HalfIndex(static_cast<int>(parse_int(f[1], line))),
                           HalfIndex(static_cast<int>(parse_int(f[2], line)))};
        if (p.dim < 0 || p.birth > p.death || p.birth.twice < 2) throw ParseError(line, "invalid persistence point");
        pts.push_back(p);
    });
    return ZPD(std::move(pts));
}

std::map<std::string, std::string> read_key_values(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        std::size_t cut = s.find('=');
        if (cut == std::string::npos) cut = s.find_first_of(" \t");
        if (cut == std::string::npos) throw ParseError(line, "expected `key = value`");
        const std::string key = trim(s.substr(0, cut)), value = trim(s.substr(cut + 1));
        if (key.empty()) throw ParseError(line, "empty key");
        out[key] = value;
    }
    return out;
}

}  // namespace zgcnet
