#include "switchgrid/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace switchgrid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

// Strict object view: unknown keys anywhere in the file are rejected, so a
// typo never silently falls back to a default.
class Obj {
  public:
    Obj(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j_->is_object()) fail(path_, "expected an object");
    }
    const json& get(const char* key) {
        seen_.insert(key);
        auto it = j_->find(key);
        if (it == j_->end()) fail(path_, std::string("missing required key '") + key + "'");
        return *it;
    }
    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }
    std::string sub(const char* key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }
    void done() const {
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!seen_.count(it.key())) fail(path_, "unknown key '" + it.key() + "'");
    }

  private:
    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

Vec vec(const json& j, const std::string& where, int want = -1) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Vec out;
    out.reserve(j.size());
    for (size_t k = 0; k < j.size(); ++k) out.push_back(num(j[k], where));
    if (want >= 0 && static_cast<int>(out.size()) != want)
        fail(where, "expected " + std::to_string(want) + " entries, got " +
                        std::to_string(out.size()));
    return out;
}

std::vector<int> ivec(const json& j, const std::string& where, int want = -1) {
    if (!j.is_array()) fail(where, "expected an array of integers");
    std::vector<int> out;
    for (size_t k = 0; k < j.size(); ++k) out.push_back(integer(j[k], where));
    if (want >= 0 && static_cast<int>(out.size()) != want)
        fail(where, "expected " + std::to_string(want) + " entries, got " +
                        std::to_string(out.size()));
    return out;
}

Mat matrix(const json& j, const std::string& where, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        fail(where, "expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        Vec row = vec(j[static_cast<size_t>(r)], where, cols);
        for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)];
    }
    return m;
}

// ---- scalar coefficient families -------------------------------------------
// Registered by name: constant, affine, diagonal-quadratic, tabulated-on-grid.
// Each parses to a SmoothFn with exact derivatives so validators and barrier
// arithmetic can consume any of them.

SmoothFn scalar_constant(double v, int dim) { return smooth_constant(v, dim); }

SmoothFn scalar_affine(double c0, Vec kx, double kt, int dim) {
    SmoothFn f;
    f.value = [c0, kx, kt](const Vec& x, double t) {
        double v = c0 + kt * t;
        for (size_t k = 0; k < kx.size(); ++k) v += kx[k] * x[k];
        return v;
    };
    f.gradient = [kx](const Vec&, double) { return kx; };
    f.hessian = [dim](const Vec&, double) { return Mat(dim, dim); };
    f.time_deriv = [kt](const Vec&, double) { return kt; };
    return f;
}

SmoothFn scalar_diag_quadratic(double c0, Vec lin, Vec quad, double kt, int dim) {
    SmoothFn f;
    f.value = [c0, lin, quad, kt](const Vec& x, double t) {
        double v = c0 + kt * t;
        for (size_t k = 0; k < quad.size(); ++k) v += lin[k] * x[k] + quad[k] * x[k] * x[k];
        return v;
    };
    f.gradient = [lin, quad, dim](const Vec& x, double) {
        Vec g(dim, 0.0);
        for (int k = 0; k < dim; ++k) g[k] = lin[k] + 2.0 * quad[k] * x[k];
        return g;
    };
    f.hessian = [quad, dim](const Vec&, double) {
        Mat h(dim, dim);
        for (int k = 0; k < dim; ++k) h(k, k) = 2.0 * quad[k];
        return h;
    };
    f.time_deriv = [kt](const Vec&, double) { return kt; };
    return f;
}

// Piecewise-linear table along one coordinate axis, clamped outside the grid.
struct Table {
    int axis = 0;
    std::vector<double> xs, ys;

    size_t segment(double u) const {
        // index of the segment [xs[s], xs[s+1]) containing u (clamped)
        if (u <= xs.front()) return 0;
        if (u >= xs.back()) return xs.size() - 2;
        size_t lo = 0, hi = xs.size() - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            (xs[mid] <= u ? lo : hi) = mid;
        }
        return lo;
    }
    double value(double u) const {
        if (u <= xs.front()) return ys.front();
        if (u >= xs.back()) return ys.back();
        size_t s = segment(u);
        double w = (u - xs[s]) / (xs[s + 1] - xs[s]);
        return ys[s] + w * (ys[s + 1] - ys[s]);
    }
    double slope(double u) const {
        if (u < xs.front() || u > xs.back()) return 0.0;
        size_t s = segment(u);
        return (ys[s + 1] - ys[s]) / (xs[s + 1] - xs[s]);
    }
};

SmoothFn scalar_tabulated(Table tbl, int dim) {
    SmoothFn f;
    const int axis = tbl.axis;
    f.value = [tbl, axis](const Vec& x, double) { return tbl.value(x[axis]); };
    f.gradient = [tbl, axis, dim](const Vec& x, double) {
        Vec g(dim, 0.0);
        g[axis] = tbl.slope(x[axis]);
        return g;
    };
    f.hessian = [dim](const Vec&, double) { return Mat(dim, dim); };
    f.time_deriv = [](const Vec&, double) { return 0.0; };
    return f;
}

SmoothFn parse_scalar_family(const json& j, const std::string& where, int dim) {
    Obj o(j, where);
    const std::string family = text(o.get("family"), o.sub("family"));
    SmoothFn out;
    if (family == "constant") {
        out = scalar_constant(num(o.get("value"), o.sub("value")), dim);
    } else if (family == "affine") {
        double c0 = o.find("const") ? num(*o.find("const"), o.sub("const")) : 0.0;
        Vec kx = o.find("x") ? vec(*o.find("x"), o.sub("x"), dim) : Vec(dim, 0.0);
        double kt = o.find("t") ? num(*o.find("t"), o.sub("t")) : 0.0;
        out = scalar_affine(c0, std::move(kx), kt, dim);
    } else if (family == "diagonal-quadratic") {
        double c0 = o.find("const") ? num(*o.find("const"), o.sub("const")) : 0.0;
        Vec lin = o.find("x") ? vec(*o.find("x"), o.sub("x"), dim) : Vec(dim, 0.0);
        Vec quad = vec(o.get("quad"), o.sub("quad"), dim);
        double kt = o.find("t") ? num(*o.find("t"), o.sub("t")) : 0.0;
        out = scalar_diag_quadratic(c0, std::move(lin), std::move(quad), kt, dim);
    } else if (family == "tabulated") {
        Table tbl;
        tbl.axis = integer(o.get("dim"), o.sub("dim")) - 1;  // configs count axes from 1
        if (tbl.axis < 0 || tbl.axis >= dim)
            fail(o.sub("dim"), "axis outside the state dimension");
        tbl.xs = vec(o.get("points"), o.sub("points"));
        tbl.ys = vec(o.get("values"), o.sub("values"));
        if (tbl.xs.size() < 2) fail(o.sub("points"), "need at least two points");
        if (tbl.xs.size() != tbl.ys.size())
            fail(o.sub("values"), "points and values must have equal length");
        for (size_t k = 1; k < tbl.xs.size(); ++k)
            if (!(tbl.xs[k] > tbl.xs[k - 1]))
                fail(o.sub("points"), "points must be strictly increasing");
        out = scalar_tabulated(std::move(tbl), dim);
    } else {
        fail(where, "unknown coefficient family '" + family +
                        "' (expected constant, affine, diagonal-quadratic, or tabulated)");
    }
    o.done();
    return out;
}

VectorFn parse_vector_family(const json& j, const std::string& where, int n) {
    Obj o(j, where);
    const std::string family = text(o.get("family"), o.sub("family"));
    VectorFn out;
    if (family == "constant") {
        Vec v = vec(o.get("value"), o.sub("value"), n);
        out = [v](const Vec&, double) { return v; };
    } else if (family == "affine") {
        Vec c = o.find("const") ? vec(*o.find("const"), o.sub("const"), n) : Vec(n, 0.0);
        Mat m = o.find("matrix") ? matrix(*o.find("matrix"), o.sub("matrix"), n, n) : Mat(n, n);
        out = [c, m, n](const Vec& x, double) {
            Vec v = c;
            for (int r = 0; r < n; ++r)
                for (int q = 0; q < n; ++q) v[r] += m(r, q) * x[q];
            return v;
        };
    } else {
        fail(where, "unknown drift family '" + family + "' (expected constant or affine)");
    }
    o.done();
    return out;
}

MatrixFn parse_sigma(const json& j, const std::string& where, int n) {
    Obj o(j, where);
    const std::string family = text(o.get("family"), o.sub("family"));
    MatrixFn out;
    if (family == "constant") {
        Mat m(n, n);
        if (const json* diag = o.find("diagonal")) {
            Vec d = vec(*diag, o.sub("diagonal"), n);
            for (int k = 0; k < n; ++k) m(k, k) = d[k];
        } else {
            m = matrix(o.get("matrix"), o.sub("matrix"), n, n);
        }
        out = [m](const Vec&, double) { return m; };
    } else if (family == "diagonal") {
        const json& entries = o.get("entries");
        if (!entries.is_array() || static_cast<int>(entries.size()) != n)
            fail(o.sub("entries"), "expected one scalar family per diagonal entry");
        std::vector<SmoothFn> fs;
        for (int k = 0; k < n; ++k)
            fs.push_back(parse_scalar_family(entries[static_cast<size_t>(k)],
                                             o.sub("entries"), n));
        out = [fs, n](const Vec& x, double t) {
            Mat m(n, n);
            for (int k = 0; k < n; ++k) m(k, k) = fs[static_cast<size_t>(k)].value(x, t);
            return m;
        };
    } else {
        fail(where, "unknown sigma family '" + family + "' (expected constant or diagonal)");
    }
    o.done();
    return out;
}

JumpFn parse_eta(const json& j, const std::string& where, int n, int l) {
    Obj o(j, where);
    const std::string family = text(o.get("family"), o.sub("family"));
    JumpFn out;
    if (family == "zero") {
        out = [n](const Vec&, double, const Vec&) { return Vec(n, 0.0); };
    } else if (family == "linear-z") {
        Vec scales;
        if (const json* s = o.find("scales")) {
            scales = vec(*s, o.sub("scales"), n);
        } else {
            scales.assign(n, num(o.get("scale"), o.sub("scale")));
        }
        if (l != n)
            fail(where, "linear-z requires the jump mark dimension to equal the state dimension");
        out = [scales, n](const Vec&, double, const Vec& z) {
            Vec d(n, 0.0);
            for (int k = 0; k < n; ++k) d[k] = scales[static_cast<size_t>(k)] * z[k];
            return d;
        };
    } else {
        fail(where, "unknown eta family '" + family + "' (expected zero or linear-z)");
    }
    o.done();
    return out;
}

ScalarFn as_scalar(const SmoothFn& f) {
    return [f](const Vec& x, double t) { return f.value(x, t); };
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

RunConfig parse_config(const std::string& json_text, const std::string& source_name) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error in ") + source_name + ": " + e.what());
    }

    RunConfig rc;
    rc.config_hash = fnv1a_hex(json_text);
    rc.source_path = source_name;

    Obj top(root, "config");

    // ---- model ----
    int n = 1;
    {
        Obj m(top.get("model"), "model");
        n = integer(m.get("dim_state"), m.sub("dim_state"));
        if (n < 1) fail(m.sub("dim_state"), "state dimension must be at least 1");
        int l = m.find("dim_jump") ? integer(*m.find("dim_jump"), m.sub("dim_jump")) : n;
        rc.model.dim_state = n;
        rc.model.dim_jump = l;
        rc.model.drift = parse_vector_family(m.get("drift"), m.sub("drift"), n);
        rc.model.sigma = parse_sigma(m.get("sigma"), m.sub("sigma"), n);
        if (const json* e = m.find("eta")) {
            rc.model.eta = parse_eta(*e, m.sub("eta"), n, l);
        } else {
            rc.model.eta = [n](const Vec&, double, const Vec&) { return Vec(n, 0.0); };
        }
        std::vector<LevyAtom> atoms;
        if (const json* a = m.find("atoms")) {
            if (!a->is_array()) fail(m.sub("atoms"), "expected an array of atoms");
            for (size_t k = 0; k < a->size(); ++k) {
                Obj ao((*a)[k], m.sub("atoms"));
                LevyAtom atom;
                atom.z = vec(ao.get("z"), m.sub("atoms") + ".z", l);
                atom.w = num(ao.get("w"), m.sub("atoms") + ".w");
                ao.done();
                atoms.push_back(std::move(atom));
            }
        }
        double r_min = 0.0;
        if (const json* r = m.find("r_min")) r_min = num(*r, m.sub("r_min"));
        if (r_min <= 0.0) {
            r_min = 1e300;
            for (const auto& a : atoms) r_min = std::min(r_min, norm2(a.z));
            if (atoms.empty()) r_min = 0.1;
        }
        rc.model.measure.atoms = std::move(atoms);
        rc.model.measure.r_min = r_min;
        rc.model.measure.bound =
            m.find("levy_bound") ? num(*m.find("levy_bound"), m.sub("levy_bound")) : -1.0;
        rc.model.exp_tail_rate =
            m.find("exp_tail_rate") ? num(*m.find("exp_tail_rate"), m.sub("exp_tail_rate")) : 1.0;
        rc.model.eta_bound =
            m.find("eta_bound") ? num(*m.find("eta_bound"), m.sub("eta_bound")) : -1.0;
        rc.model.lip_bound =
            m.find("lip_bound") ? num(*m.find("lip_bound"), m.sub("lip_bound")) : -1.0;
        m.done();
    }

    // ---- problem ----
    int d = 1;
    {
        Obj p(top.get("problem"), "problem");
        d = integer(p.get("modes"), p.sub("modes"));
        if (d < 1) fail(p.sub("modes"), "need at least one mode");
        rc.problem.modes = d;
        rc.problem.horizon = num(p.get("horizon"), p.sub("horizon"));
        if (!(rc.problem.horizon > 0.0)) fail(p.sub("horizon"), "horizon must be positive");
        rc.problem.discount =
            p.find("discount") ? num(*p.find("discount"), p.sub("discount")) : 0.0;
        if (rc.problem.discount < 0.0) fail(p.sub("discount"), "discount must be >= 0");

        const json& psi = p.get("psi");
        if (!psi.is_array() || static_cast<int>(psi.size()) != d)
            fail(p.sub("psi"), "expected one running-payoff family per mode");
        for (int i = 0; i < d; ++i)
            rc.problem.psi.push_back(
                as_scalar(parse_scalar_family(psi[static_cast<size_t>(i)], p.sub("psi"), n)));

        const json& term = p.get("terminal");
        if (!term.is_array() || static_cast<int>(term.size()) != d)
            fail(p.sub("terminal"), "expected one terminal family per mode");
        for (int i = 0; i < d; ++i)
            rc.problem.terminal.push_back(as_scalar(
                parse_scalar_family(term[static_cast<size_t>(i)], p.sub("terminal"), n)));

        const json& costs = p.get("costs");
        if (!costs.is_array() || static_cast<int>(costs.size()) != d)
            fail(p.sub("costs"), "expected a modes x modes array of cost families");
        rc.problem.cost.assign(static_cast<size_t>(d), {});
        for (int i = 0; i < d; ++i) {
            const json& row = costs[static_cast<size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != d)
                fail(p.sub("costs"), "row " + std::to_string(i + 1) + " must have one entry per mode");
            for (int q = 0; q < d; ++q) {
                SmoothFn f = parse_scalar_family(row[static_cast<size_t>(q)], p.sub("costs"), n);
                if (i == q) {
                    // Self-switches are free by definition; anything else would
                    // silently distort the obstacle.
                    if (f.value(Vec(n, 0.0), 0.0) != 0.0 ||
                        f.value(Vec(n, 1.0), rc.problem.horizon) != 0.0)
                        fail(p.sub("costs"),
                             "diagonal cost entries must be identically zero");
                }
                rc.problem.cost[static_cast<size_t>(i)].push_back(std::move(f));
            }
        }
        rc.problem.growth_B =
            p.find("growth_B") ? num(*p.find("growth_B"), p.sub("growth_B")) : -1.0;
        rc.problem.growth_gamma =
            p.find("growth_gamma") ? num(*p.find("growth_gamma"), p.sub("growth_gamma")) : 1.0;
        p.done();
    }

    // ---- lattice ----
    {
        Obj la(top.get("lattice"), "lattice");
        rc.lattice.box.lo = vec(la.get("lo"), la.sub("lo"), n);
        rc.lattice.box.hi = vec(la.get("hi"), la.sub("hi"), n);
        rc.lattice.nodes = ivec(la.get("nodes"), la.sub("nodes"), n);
        rc.lattice.time_steps = integer(la.get("time_steps"), la.sub("time_steps"));
        rc.lattice.horizon = rc.problem.horizon;
        la.done();
        rc.lattice.validate();
    }

    // ---- solver ----
    rc.solver.nonlocal = NonlocalConfig::for_measure(rc.model.measure);
    if (const json* s = top.find("solver")) {
        Obj so(*s, "solver");
        if (const json* k = so.find("kappa")) {
            rc.solver.nonlocal.kappa = num(*k, so.sub("kappa"));
            if (!(rc.solver.nonlocal.kappa > 0.0)) fail(so.sub("kappa"), "kappa must be positive");
        }
        if (const json* b = so.find("boundary")) {
            const std::string mode = text(*b, so.sub("boundary"));
            if (mode == "clamp")
                rc.solver.nonlocal.out_of_box = OutOfBox::Clamp;
            else if (mode == "extrapolate")
                rc.solver.nonlocal.out_of_box = OutOfBox::Extrapolate;
            else
                fail(so.sub("boundary"), "expected 'clamp' or 'extrapolate'");
        }
        if (const json* v = so.find("lcp_tol")) rc.solver.lcp_tol = num(*v, so.sub("lcp_tol"));
        if (const json* v = so.find("obstacle_tol"))
            rc.solver.obstacle_tol = num(*v, so.sub("obstacle_tol"));
        if (const json* v = so.find("max_sweeps"))
            rc.solver.max_sweeps = integer(*v, so.sub("max_sweeps"));
        if (const json* v = so.find("validation_samples"))
            rc.solver.validation_samples = integer(*v, so.sub("validation_samples"));
        if (const json* v = so.find("residual_table"))
            rc.residual_full = boolean(*v, so.sub("residual_table"));
        so.done();
    }

    // ---- validation sampling ----
    rc.validation.box = rc.lattice.box;
    rc.validation.t_hi = rc.problem.horizon;
    rc.validation.samples = rc.solver.validation_samples;
    if (const json* v = top.find("validation")) {
        Obj vo(*v, "validation");
        if (const json* sp = vo.find("samples")) {
            rc.validation.samples = integer(*sp, vo.sub("samples"));
            rc.solver.validation_samples = rc.validation.samples;
        }
        if (const json* mg = vo.find("margin")) rc.validation.margin = num(*mg, vo.sub("margin"));
        if (const json* mc = vo.find("max_cycle"))
            rc.validation.max_cycle = integer(*mc, vo.sub("max_cycle"));
        if (const json* lg = vo.find("lip_growth_factor"))
            rc.validation.lip_growth_factor = num(*lg, vo.sub("lip_growth_factor"));
        vo.done();
    }

    // ---- barriers ----
    if (const json* b = top.find("barriers")) {
        Obj bo(*b, "barriers");
        const json& anchors = bo.get("anchors");
        if (!anchors.is_array()) fail(bo.sub("anchors"), "expected an array of anchors");
        for (size_t k = 0; k < anchors.size(); ++k) {
            Obj ao(anchors[k], bo.sub("anchors"));
            BarrierRequest req;
            int mode = integer(ao.get("mode"), bo.sub("anchors") + ".mode");
            if (mode < 1 || mode > d)
                fail(bo.sub("anchors") + ".mode", "mode outside 1.." + std::to_string(d));
            req.anchor_mode = mode - 1;
            req.anchor = vec(ao.get("x"), bo.sub("anchors") + ".x", n);
            req.epsilon = num(ao.get("epsilon"), bo.sub("anchors") + ".epsilon");
            if (!(req.epsilon > 0.0))
                fail(bo.sub("anchors") + ".epsilon", "epsilon must be positive");
            ao.done();
            rc.barriers.push_back(std::move(req));
        }
        if (const json* md = bo.find("max_doublings"))
            rc.barrier_max_doublings = integer(*md, bo.sub("max_doublings"));
        if (const json* pe = bo.find("perturbation")) {
            Obj po(*pe, bo.sub("perturbation"));
            rc.perturbation.theta = num(po.get("theta"), bo.sub("perturbation") + ".theta");
            if (const json* lv = po.find("lambda"))
                rc.perturbation.lambda = num(*lv, bo.sub("perturbation") + ".lambda");
            if (const json* gv = po.find("gamma"))
                rc.perturbation.gamma = num(*gv, bo.sub("perturbation") + ".gamma");
            po.done();
        }
        bo.done();
    }

    // ---- monte carlo ----
    rc.mc.dt = rc.lattice.dt();
    if (const json* m = top.find("mc")) {
        Obj mo(*m, "mc");
        if (const json* v = mo.find("paths"))
            rc.mc.paths = static_cast<int64_t>(integer(*v, mo.sub("paths")));
        if (const json* v = mo.find("dt")) rc.mc.dt = num(*v, mo.sub("dt"));
        if (const json* v = mo.find("seed"))
            rc.mc.seed = static_cast<uint64_t>(integer(*v, mo.sub("seed")));
        if (const json* v = mo.find("antithetic")) rc.mc.antithetic = boolean(*v, mo.sub("antithetic"));
        if (const json* v = mo.find("threads")) rc.mc.threads = integer(*v, mo.sub("threads"));
        mo.done();
    }

    // ---- compare probes ----
    if (const json* pr = top.find("probes")) {
        if (!pr->is_array()) fail("probes", "expected an array of probe points");
        for (size_t k = 0; k < pr->size(); ++k) {
            Obj po((*pr)[k], "probes");
            int mode = integer(po.get("mode"), "probes.mode");
            if (mode < 1 || mode > d) fail("probes.mode", "mode outside 1.." + std::to_string(d));
            Vec x = vec(po.get("x"), "probes.x", n);
            po.done();
            rc.probes.emplace_back(std::move(x), mode - 1);
        }
    } else {
        Vec center(n, 0.0);
        for (int k = 0; k < n; ++k)
            center[k] = 0.5 * (rc.lattice.box.lo[k] + rc.lattice.box.hi[k]);
        rc.probes.emplace_back(std::move(center), 0);
    }

    if (const json* od = top.find("out_dir")) rc.out_dir = text(*od, "out_dir");

    top.done();
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace switchgrid
