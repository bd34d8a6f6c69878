#include "eddp/instance_io.hpp"

#include "eddp/errors.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace eddp {

namespace {

class Tokens {
public:
    explicit Tokens(std::istream& in) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) toks_.push_back({tok, lineno});
        }
    }

    bool done() const { return pos_ >= toks_.size(); }
    const std::string& peek() const {
        if (done()) fail("unexpected end of input");
        return toks_[pos_].text;
    }
    std::string next() {
        const std::string& t = peek();
        ++pos_;
        return t;
    }
    void expect(const std::string& keyword) {
        const std::string t = next();
        if (t != keyword) fail("expected '" + keyword + "', found '" + t + "'", 1);
    }
    double number() {
        const std::string t = next();
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end != '\0' || errno == ERANGE || std::isnan(v))
            fail("expected a number, found '" + t + "'", 1);
        return v;
    }
    long integer() {
        const std::string t = next();
        long v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || p != t.data() + t.size()) fail("expected an integer, found '" + t + "'", 1);
        return v;
    }
    int count(const std::string& what) {
        const long v = integer();
        if (v < 0 || v > 10'000'000) fail(what + " must be a nonnegative count", 1);
        return static_cast<int>(v);
    }
    [[noreturn]] void fail(const std::string& msg, std::size_t back = 0) const {
        std::size_t at = pos_ >= back ? pos_ - back : 0;
        if (at >= toks_.size()) at = toks_.empty() ? 0 : toks_.size() - 1;
        const int line = toks_.empty() ? 0 : toks_[at].line;
        throw ParseError("line " + std::to_string(line) + ": " + msg);
    }

private:
    struct Tok {
        std::string text;
        int line;
    };
    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
};

Eigen::VectorXd read_vector(Tokens& t, int len) {
    Eigen::VectorXd v(len);
    for (int i = 0; i < len; ++i) v(i) = t.number();
    return v;
}

// Vectors and matrices carry their own sizes so that shape errors are
// reported as such instead of desynchronizing the token stream.
Eigen::VectorXd keyed_vector(Tokens& t, const std::string& key, int len) {
    t.expect(key);
    const int got = t.count(key + " length");
    Eigen::VectorXd v = read_vector(t, got);
    if (got != len)
        throw DimensionError(key + " has length " + std::to_string(got) + ", expected " + std::to_string(len));
    return v;
}

Eigen::MatrixXd keyed_matrix(Tokens& t, const std::string& key, int rows, int cols) {
    t.expect(key);
    const int r = t.count(key + " rows");
    const int c = t.count(key + " columns");
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = t.number();
    if (r != rows || c != cols)
        throw DimensionError(key + " is " + std::to_string(r) + "x" + std::to_string(c) + ", expected " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    return m;
}

std::vector<RowKind> read_kinds(Tokens& t, int m) {
    t.expect("kinds");
    std::vector<RowKind> k;
    for (int i = 0; i < m; ++i) {
        const std::string s = t.next();
        if (s == "E")
            k.push_back(RowKind::Equality);
        else if (s == "G")
            k.push_back(RowKind::GreaterEqual);
        else
            t.fail("row kind must be E or G, found '" + s + "'", 1);
    }
    return k;
}

PiecewiseLinearCost read_cost(Tokens& t, int n) {
    t.expect("pieces");
    const int p = t.count("pieces");
    if (p < 1) t.fail("a cost needs at least one piece", 1);
    PiecewiseLinearCost c;
    c.gradients.resize(p, n);
    c.offsets.resize(p);
    for (int k = 0; k < p; ++k) {
        t.expect("piece");
        for (int j = 0; j < n; ++j) c.gradients(k, j) = t.number();
        c.offsets(k) = t.number();
    }
    return c;
}

Scenario read_scenario(Tokens& t, int n, int index) {
    t.expect("scenario");
    if (t.integer() != index) t.fail("scenarios must be numbered 0..N in order", 1);
    Scenario s;
    t.expect("rows");
    const int m = t.count("rows");
    s.A = keyed_matrix(t, "A", m, n);
    s.B = keyed_matrix(t, "B", m, n);
    s.b = keyed_vector(t, "b", m);
    s.kinds = read_kinds(t, m);
    t.expect("phi_rows");
    const int mp = t.count("phi_rows");
    if (mp > 0) {
        s.Q = keyed_matrix(t, "Q", mp, n);
        s.R = keyed_matrix(t, "R", mp, n);
        s.r = keyed_vector(t, "r", mp);
    } else {
        s.Q.resize(0, n);
        s.R.resize(0, n);
        s.r.resize(0);
    }
    s.cost = read_cost(t, n);
    t.expect("end");
    return s;
}

StationaryInstance read_stationary_body(Tokens& t) {
    StationaryInstance inst;
    t.expect("n");
    inst.n = t.count("n");
    if (inst.n < 1) t.fail("n must be positive", 1);
    t.expect("lambda");
    inst.lambda = t.number();
    inst.lower = keyed_vector(t, "lower", inst.n);
    inst.upper = keyed_vector(t, "upper", inst.n);
    inst.x0 = keyed_vector(t, "x0", inst.n);
    t.expect("scenarios");
    const int N = t.count("scenarios");
    inst.scenario0 = read_scenario(t, inst.n, 0);
    for (int i = 1; i <= N; ++i) inst.scenarios.push_back(read_scenario(t, inst.n, i));
    return inst;
}

void expect_header(Tokens& t, const std::string& magic) {
    t.expect(magic);
    if (t.integer() != 1) t.fail("unsupported format version", 1);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    return f;
}

// Shortest round-trip representation.
std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_vector(std::ostream& o, const std::string& key, const Eigen::VectorXd& v) {
    o << key << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) o << ' ' << fmt(v(i));
    o << '\n';
}

void write_matrix(std::ostream& o, const std::string& key, const Eigen::MatrixXd& m) {
    o << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) o << (j ? " " : "  ") << fmt(m(i, j));
        o << '\n';
    }
}

void write_kinds(std::ostream& o, const std::vector<RowKind>& kinds) {
    o << "kinds";
    for (auto k : kinds) o << (k == RowKind::Equality ? " E" : " G");
    o << '\n';
}

void write_cost(std::ostream& o, const PiecewiseLinearCost& c) {
    o << "pieces " << c.num_pieces() << '\n';
    for (int p = 0; p < c.num_pieces(); ++p) {
        o << "piece";
        for (int j = 0; j < c.dim(); ++j) o << ' ' << fmt(c.gradients(p, j));
        o << ' ' << fmt(c.offsets(p)) << '\n';
    }
}

void write_scenario(std::ostream& o, const Scenario& s, int index) {
    o << "scenario " << index << '\n';
    o << "rows " << s.num_rows() << '\n';
    write_matrix(o, "A", s.A);
    write_matrix(o, "B", s.B);
    write_vector(o, "b", s.b);
    write_kinds(o, s.kinds);
    o << "phi_rows " << s.num_phi_rows() << '\n';
    if (s.num_phi_rows() > 0) {
        write_matrix(o, "Q", s.Q);
        write_matrix(o, "R", s.R);
        write_vector(o, "r", s.r);
    }
    write_cost(o, s.cost);
    o << "end\n";
}

void write_stationary_body(std::ostream& o, const StationaryInstance& inst) {
    o << "n " << inst.n << '\n';
    o << "lambda " << fmt(inst.lambda) << '\n';
    write_vector(o, "lower", inst.lower);
    write_vector(o, "upper", inst.upper);
    write_vector(o, "x0", inst.x0);
    o << "scenarios " << inst.N() << '\n';
    write_scenario(o, inst.scenario0, 0);
    for (int i = 1; i <= inst.N(); ++i) write_scenario(o, inst.scenario(i), i);
}

} // namespace

InstanceKind detect_instance_kind(const std::string& path) {
    std::ifstream f = open_in(path);
    Tokens t(f);
    const std::string head = t.next();
    if (head == "eddp-instance") return InstanceKind::Stationary;
    if (head == "eddp-hierarchical") return InstanceKind::Hierarchical;
    throw ParseError("unknown instance header '" + head + "'");
}

StationaryInstance parse_instance(std::istream& in) {
    Tokens t(in);
    expect_header(t, "eddp-instance");
    StationaryInstance inst = read_stationary_body(t);
    if (!t.done()) t.fail("trailing content '" + t.peek() + "'");
    inst.finalize();
    return inst;
}

StationaryInstance load_instance(const std::string& path) {
    std::ifstream f = open_in(path);
    return parse_instance(f);
}

void write_instance(std::ostream& out, const StationaryInstance& inst) {
    out << "eddp-instance 1\n";
    write_stationary_body(out, inst);
}

void save_instance(const std::string& path, const StationaryInstance& inst) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write '" + path + "'");
    write_instance(f, inst);
}

HierarchicalInstance parse_hierarchical(std::istream& in) {
    Tokens t(in);
    expect_header(t, "eddp-hierarchical");
    HierarchicalInstance h;
    h.top = read_stationary_body(t);
    const int n = h.top.n;
    TwoStageLowerLevel& lo = h.lower;
    t.expect("lower_level");
    t.expect("n1");
    lo.n1 = t.count("n1");
    t.expect("rows");
    const int m1 = t.count("rows");
    lo.A1 = keyed_matrix(t, "A1", m1, lo.n1);
    lo.B1 = keyed_matrix(t, "B1", m1, n);
    lo.b1 = keyed_vector(t, "b1", m1);
    lo.kinds1 = read_kinds(t, m1);
    lo.lower1 = keyed_vector(t, "lower", lo.n1);
    lo.upper1 = keyed_vector(t, "upper", lo.n1);
    lo.cost1 = read_cost(t, lo.n1);
    t.expect("subgradient_bound");
    lo.subgradient_bound = t.number();
    t.expect("samples");
    const int N2 = t.count("samples");
    for (int j = 1; j <= N2; ++j) {
        t.expect("sample");
        if (t.integer() != j) t.fail("samples must be numbered 1..N2 in order", 1);
        SecondStageSample s;
        t.expect("n2");
        const int n2 = t.count("n2");
        t.expect("rows");
        const int m2 = t.count("rows");
        s.A = keyed_matrix(t, "A", m2, n2);
        s.B = keyed_matrix(t, "B", m2, lo.n1);
        s.b = keyed_vector(t, "b", m2);
        s.kinds = read_kinds(t, m2);
        s.lower = keyed_vector(t, "lower", n2);
        s.upper = keyed_vector(t, "upper", n2);
        s.cost = read_cost(t, n2);
        t.expect("end");
        lo.samples.push_back(std::move(s));
    }
    t.expect("end_lower");
    while (!t.done()) {
        const std::string key = t.next();
        if (key == "eps_lo")
            h.eps_lo = t.number();
        else if (key == "rho")
            h.rho = t.number();
        else if (key == "M_D")
            h.M_D = t.number();
        else if (key == "eps_regularity")
            h.eps_regularity = t.number();
        else
            t.fail("unknown key '" + key + "'", 1);
    }
    h.finalize();
    return h;
}

HierarchicalInstance load_hierarchical(const std::string& path) {
    std::ifstream f = open_in(path);
    return parse_hierarchical(f);
}

void write_hierarchical(std::ostream& o, const HierarchicalInstance& h) {
    o << "eddp-hierarchical 1\n";
    write_stationary_body(o, h.top);
    const TwoStageLowerLevel& lo = h.lower;
    o << "lower_level\n";
    o << "n1 " << lo.n1 << '\n';
    o << "rows " << lo.b1.size() << '\n';
    write_matrix(o, "A1", lo.A1);
    write_matrix(o, "B1", lo.B1);
    write_vector(o, "b1", lo.b1);
    write_kinds(o, lo.kinds1);
    write_vector(o, "lower", lo.lower1);
    write_vector(o, "upper", lo.upper1);
    write_cost(o, lo.cost1);
    o << "subgradient_bound " << fmt(lo.subgradient_bound) << '\n';
    o << "samples " << lo.N2() << '\n';
    for (int j = 0; j < lo.N2(); ++j) {
        const auto& s = lo.samples[static_cast<std::size_t>(j)];
        o << "sample " << j + 1 << '\n';
        o << "n2 " << s.lower.size() << '\n';
        o << "rows " << s.b.size() << '\n';
        write_matrix(o, "A", s.A);
        write_matrix(o, "B", s.B);
        write_vector(o, "b", s.b);
        write_kinds(o, s.kinds);
        write_vector(o, "lower", s.lower);
        write_vector(o, "upper", s.upper);
        write_cost(o, s.cost);
        o << "end\n";
    }
    o << "end_lower\n";
    o << "eps_lo " << fmt(h.eps_lo) << '\n';
    o << "rho " << fmt(h.rho) << '\n';
    o << "M_D " << fmt(h.M_D) << '\n';
    if (std::isfinite(h.eps_regularity)) o << "eps_regularity " << fmt(h.eps_regularity) << '\n';
}

void save_hierarchical(const std::string& path, const HierarchicalInstance& h) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write '" + path + "'");
    write_hierarchical(f, h);
}

} // namespace eddp
