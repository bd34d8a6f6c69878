#include "eddp/trace_io.hpp"

#include "eddp/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace eddp {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T>
std::string opt(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>)
        return fmt(*v);
    else
        return std::to_string(*v);
}

const char* kHeader = "iter,lb_root,ub_model,ub_policy,t_star,selected,wall_ms,cuts_total";

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, int line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("trace line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

long to_long(const std::string& s, int line) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("trace line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

} // namespace

void write_trace(std::ostream& out, const std::vector<IterationRecord>& records, bool hierarchical) {
    out << kHeader << (hierarchical ? ",eps_c_max,pdsa_iters" : "") << '\n';
    for (const auto& r : records) {
        out << r.iter << ',' << fmt(r.lb_root) << ',' << opt(r.ub_model) << ',' << opt(r.ub_policy) << ','
            << opt(r.t_star) << ',' << r.selected << ',' << opt(r.wall_ms) << ',' << r.cuts_total;
        if (hierarchical) out << ',' << opt(r.eps_c_max) << ',' << opt(r.pdsa_iters);
        out << '\n';
    }
}

void save_trace(const std::string& path, const std::vector<IterationRecord>& records, bool hierarchical) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write trace '" + path + "'");
    write_trace(f, records, hierarchical);
}

std::vector<IterationRecord> read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace");
    const auto head = split(line);
    const bool hier = head.size() == 10;
    if (head.size() != 8 && !hier) throw ParseError("unexpected trace header");
    std::vector<IterationRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != head.size()) throw ParseError("trace line " + std::to_string(lineno) + ": wrong field count");
        IterationRecord r;
        r.iter = static_cast<int>(to_long(f[0], lineno));
        r.lb_root = to_double(f[1], lineno);
        if (!f[2].empty()) r.ub_model = to_double(f[2], lineno);
        if (!f[3].empty()) r.ub_policy = to_double(f[3], lineno);
        if (!f[4].empty()) r.t_star = static_cast<int>(to_long(f[4], lineno));
        r.selected = static_cast<int>(to_long(f[5], lineno));
        if (!f[6].empty()) r.wall_ms = to_double(f[6], lineno);
        r.cuts_total = static_cast<int>(to_long(f[7], lineno));
        if (hier) {
            if (!f[8].empty()) r.eps_c_max = to_double(f[8], lineno);
            if (!f[9].empty()) r.pdsa_iters = to_long(f[9], lineno);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<IterationRecord> load_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open trace '" + path + "'");
    return read_trace(f);
}

} // namespace eddp
