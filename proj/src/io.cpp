#include "switchgrid/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "switchgrid/version.hpp"

namespace switchgrid {

namespace {

using nlohmann::json;

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
    throw ConfigError("i/o error on '" + path + "': " + what);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open for writing");
    return out;
}

void stamp(std::ostream& out, const std::string& config_hash) {
    out << "# " << kToolName << ' ' << kToolVersion << " config=" << config_hash << "\n";
}

json stamp_json(const char* schema, const std::string& config_hash) {
    json j;
    j["schema"] = schema;
    j["version"] = kToolVersion;
    j["config"] = config_hash;
    return j;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

void dump(const std::string& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) io_fail(path, "write failed");
}

void coord_header(std::ostream& out, int dim) {
    for (int k = 1; k <= dim; ++k) out << ",x_" << k;
}

void coord_row(std::ostream& out, const Vec& x) {
    for (double v : x) out << ',' << format_double(v);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return std::string(buf);
}

void write_values_csv(const std::string& path, const ValueField& field,
                      const std::string& config_hash) {
    const Lattice& lat = field.lat;
    std::ofstream out = open_out(path);
    stamp(out, config_hash);
    out << "mode,time_index,t,node";
    coord_header(out, lat.dim());
    out << ",value\n";
    const int64_t size = lat.size();
    for (int n = 0; n <= lat.time_steps; ++n) {
        const std::string t = format_double(lat.time(n));
        for (int i = 0; i < field.modes; ++i) {
            const Vec& slice = field.slice(i, n);
            for (int64_t node = 0; node < size; ++node) {
                out << (i + 1) << ',' << n << ',' << t << ',' << node;
                coord_row(out, lat.coord(node));
                out << ',' << format_double(slice[static_cast<size_t>(node)]) << "\n";
            }
        }
    }
    if (!out) io_fail(path, "write failed");
}

void write_policy_csv(const std::string& path, const SwitchPolicy& policy,
                      const std::string& config_hash) {
    const Lattice& lat = policy.lat;
    std::ofstream out = open_out(path);
    stamp(out, config_hash);
    out << "mode,time_index,t,node";
    coord_header(out, lat.dim());
    out << ",action\n";  // 0 = stay, otherwise the 1-based target mode
    const int64_t size = lat.size();
    for (int n = 0; n <= lat.time_steps; ++n) {
        const std::string t = format_double(lat.time(n));
        for (int i = 0; i < policy.modes; ++i) {
            for (int64_t node = 0; node < size; ++node) {
                const int16_t a = policy.action(i, n, node);
                out << (i + 1) << ',' << n << ',' << t << ',' << node;
                coord_row(out, lat.coord(node));
                out << ',' << (a == kStay ? 0 : a + 1) << "\n";
            }
        }
    }
    if (!out) io_fail(path, "write failed");
}

void write_residual_json(const std::string& path, const ResidualReport& rep,
                         const std::string& config_hash) {
    json j = stamp_json("switchgrid/residual/1", config_hash);
    j["linf"] = rep.linf;
    j["l1"] = rep.l1;
    j["interior_count"] = rep.interior_count;
    j["boundary_layer"] = rep.boundary_layer;
    j["worst"] = {{"value", rep.worst_value},
                  {"x", vec_json(rep.worst_x)},
                  {"t", rep.worst_t},
                  {"mode", rep.worst_mode}};
    j["out_of_box_queries"] = rep.out_of_box_queries;
    j["interp_queries"] = rep.interp_queries;
    if (!rep.linf_by_time_mode.empty()) {
        json table = json::array();
        for (const auto& row : rep.linf_by_time_mode) table.push_back(row);
        j["linf_by_time_mode"] = std::move(table);
    }
    dump(path, j);
}

void write_validation_json(const std::string& path, const ValidationReport& rep,
                           const std::string& config_hash) {
    json j = stamp_json("switchgrid/validation/1", config_hash);
    j["all_pass"] = rep.all_pass();
    json checks = json::array();
    for (const CheckResult& c : rep.checks) {
        json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["detail"] = c.detail;
        if (!c.witness_x.empty()) {
            e["witness_x"] = vec_json(c.witness_x);
            e["witness_t"] = c.witness_t;
        }
        if (!c.cycle.empty()) e["cycle"] = c.cycle;
        if (!c.measured.empty()) {
            json m;
            for (const auto& [k, v] : c.measured) m[k] = v;
            e["measured"] = std::move(m);
        }
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    dump(path, j);
}

void write_barriers_json(const std::string& path, const std::vector<BarrierRunRecord>& records,
                         const std::string& config_hash) {
    json j = stamp_json("switchgrid/barriers/1", config_hash);
    bool all = true;
    json anchors = json::array();
    for (const BarrierRunRecord& r : records) {
        json a;
        a["mode"] = r.spec.anchor_mode + 1;
        a["x"] = vec_json(r.spec.anchor);
        a["epsilon"] = r.spec.epsilon;
        a["K"] = r.spec.K;
        a["lambda"] = r.spec.lambda;
        a["lipschitz"] = r.spec.lipschitz;
        a["g_at_anchor"] = r.spec.g_at_anchor;
        auto side = [](const BarrierCheck& c) {
            json s;
            s["pass"] = c.pass;
            s["min_pde_margin"] = c.min_pde_margin;
            s["min_obstacle_margin"] = c.min_obstacle_margin;
            s["min_terminal_margin"] = c.min_terminal_margin;
            s["worst"] = {{"x", vec_json(c.worst_x)}, {"t", c.worst_t}, {"mode", c.worst_mode}};
            return s;
        };
        a["above"] = side(r.above);
        a["below"] = side(r.below);
        json s;
        s["pass"] = r.sandwich.pass;
        s["verified"] = r.sandwich.verified;
        s["min_margin_below"] = r.sandwich.min_margin_below;
        s["min_margin_above"] = r.sandwich.min_margin_above;
        s["pinch_value"] = r.sandwich.pinch_value;
        s["pinch_envelope"] = r.sandwich.pinch_envelope;
        s["worst"] = {{"x", vec_json(r.sandwich.worst_x)},
                      {"t", r.sandwich.worst_t},
                      {"mode", r.sandwich.worst_mode}};
        double min_gap = 0.0, min_gap_pert = 0.0, shift = 0.0;
        bool first = true;
        for (const SandwichRow& row : r.sandwich.rows) {
            if (first) {
                min_gap = row.min_gap;
                min_gap_pert = row.min_gap_perturbed;
                first = false;
            } else {
                min_gap = std::min(min_gap, row.min_gap);
                min_gap_pert = std::min(min_gap_pert, row.min_gap_perturbed);
            }
            shift = std::max(shift, std::fabs(row.min_gap_perturbed - row.min_gap));
        }
        s["min_obstacle_gap"] = min_gap;
        s["min_obstacle_gap_perturbed"] = min_gap_pert;
        s["max_gap_shift"] = shift;
        a["sandwich"] = std::move(s);
        all = all && r.above.pass && r.below.pass && r.sandwich.pass;
        anchors.push_back(std::move(a));
    }
    j["anchors"] = std::move(anchors);
    j["pass"] = all;
    dump(path, j);
}

void write_sandwich_csv(const std::string& path, const ValueField& field,
                        const std::vector<BarrierSpec>& specs, const SwitchingProblem& problem,
                        const LevyModel& model, const PerturbationSpec* pspec,
                        const std::string& config_hash) {
    const Lattice& lat = field.lat;
    const int d = field.modes;
    const int64_t size = lat.size();
    const std::vector<int> layer = contamination_layer(model, lat, problem.horizon);

    SmoothFn pert;
    const bool perturbed = pspec != nullptr && pspec->theta != 0.0;
    if (perturbed) pert = perturbation_fn(*pspec);

    std::ofstream out = open_out(path);
    stamp(out, config_hash);
    out << "anchor,mode,time_index,t,node";
    coord_header(out, lat.dim());
    out << ",interior,below,value,above,margin_below,margin_above,obstacle_gap,"
           "obstacle_gap_perturbed\n";

    std::vector<int> idx;
    for (size_t a = 0; a < specs.size(); ++a) {
        const BarrierSpec& spec = specs[a];
        for (int n = 0; n <= lat.time_steps; ++n) {
            const double t = lat.time(n);
            const std::string ts = format_double(t);
            for (int64_t node = 0; node < size; ++node) {
                const Vec x = lat.coord(node);
                lat.unflatten(node, idx);
                const bool interior = lat.interior(idx, layer);
                const double p = perturbed ? pert.value(x, t) : 0.0;
                for (int i = 0; i < d; ++i) {
                    const double u = field.slice(i, n)[static_cast<size_t>(node)];
                    const double below = eval_barrier_below(spec, i, x, t, problem);
                    const double above = eval_barrier_above(spec, i, x, t, problem);
                    // Obstacle gap u_i - max_j(u_j - c_(i,j)), with and
                    // without the common additive perturbation.
                    double ob = -1e300, ob_pert = -1e300;
                    for (int q = 0; q < d; ++q) {
                        if (q == i) continue;
                        const double c = problem.cost[static_cast<size_t>(i)]
                                             [static_cast<size_t>(q)]
                                                 .value(x, t);
                        const double uq = field.slice(q, n)[static_cast<size_t>(node)];
                        ob = std::max(ob, uq - c);
                        ob_pert = std::max(ob_pert, (uq + p) - c);
                    }
                    const double gap = d > 1 ? u - ob : 0.0;
                    double gap_pert = d > 1 ? (u + p) - ob_pert : 0.0;
                    // The perturbation is common to every mode, so it cancels
                    // from the gap in exact arithmetic; snap roundoff-scale
                    // drift back to the exact value so it cannot read as an
                    // obstacle violation.
                    const double snap = 32.0 * std::numeric_limits<double>::epsilon() *
                                        (std::fabs(u) + std::fabs(p) + std::fabs(ob));
                    if (std::fabs(gap_pert - gap) <= snap) gap_pert = gap;
                    out << a << ',' << (i + 1) << ',' << n << ',' << ts << ',' << node;
                    coord_row(out, x);
                    out << ',' << (interior ? 1 : 0) << ',' << format_double(below) << ','
                        << format_double(u) << ',' << format_double(above) << ','
                        << format_double(u - below) << ',' << format_double(above - u) << ','
                        << format_double(gap) << ',' << format_double(gap_pert) << "\n";
                }
            }
        }
    }
    if (!out) io_fail(path, "write failed");
}

void write_compare_csv(const std::string& path, const CompareReport& rep,
                       const std::string& config_hash) {
    std::ofstream out = open_out(path);
    stamp(out, config_hash);
    const int dim = rep.points.empty() ? 0 : static_cast<int>(rep.points.front().x0.size());
    out << "point,mode";
    coord_header(out, dim);
    out << ",pde_value,mc_mean,stderr,ci95_lo,ci95_hi,gap,budget_dt,budget_h,pass\n";
    for (size_t k = 0; k < rep.points.size(); ++k) {
        const ComparePoint& p = rep.points[k];
        out << k << ',' << (p.mode + 1);
        coord_row(out, p.x0);
        out << ',' << format_double(p.pde_value) << ',' << format_double(p.mc_mean) << ','
            << format_double(p.stderr_) << ',' << format_double(p.ci95_lo) << ','
            << format_double(p.ci95_hi) << ',' << format_double(p.gap) << ','
            << format_double(p.budget_dt) << ',' << format_double(p.budget_h) << ','
            << (p.pass ? 1 : 0) << "\n";
    }
    if (!out) io_fail(path, "write failed");
}

namespace {

// Minimal CSV reader for the files this tool writes: leading '#' comments,
// one header row, comma separation, no quoting.
struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    CsvFile out;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        std::vector<std::string> cells;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (!have_header) {
            out.header = std::move(cells);
            have_header = true;
        } else {
            out.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) io_fail(path, "missing header row");
    return out;
}

int column(const CsvFile& f, const std::string& path, const std::string& name) {
    for (size_t k = 0; k < f.header.size(); ++k)
        if (f.header[k] == name) return static_cast<int>(k);
    io_fail(path, "missing column '" + name + "'");
}

double cell_num(const std::vector<std::string>& row, int col, const std::string& path) {
    if (col >= static_cast<int>(row.size())) io_fail(path, "short row");
    const std::string& s = row[static_cast<size_t>(col)];
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') io_fail(path, "bad number '" + s + "'");
    return v;
}

}  // namespace

ValueField read_values_csv(const std::string& path, const Lattice& lat, int modes) {
    CsvFile f = read_csv(path);
    const int c_mode = column(f, path, "mode");
    const int c_time = column(f, path, "time_index");
    const int c_node = column(f, path, "node");
    const int c_value = column(f, path, "value");

    ValueField field(lat, modes);
    const int64_t size = lat.size();
    const int64_t expect = static_cast<int64_t>(modes) * (lat.time_steps + 1) * size;
    if (static_cast<int64_t>(f.rows.size()) != expect)
        io_fail(path, "expected " + std::to_string(expect) + " value rows, found " +
                          std::to_string(f.rows.size()));
    std::vector<char> seen(static_cast<size_t>(expect), 0);
    for (const auto& row : f.rows) {
        const int mode = static_cast<int>(cell_num(row, c_mode, path));
        const int n = static_cast<int>(cell_num(row, c_time, path));
        const int64_t node = static_cast<int64_t>(cell_num(row, c_node, path));
        if (mode < 1 || mode > modes || n < 0 || n > lat.time_steps || node < 0 || node >= size)
            io_fail(path, "row addresses a node outside the lattice");
        const int64_t key =
            (static_cast<int64_t>(n) * modes + (mode - 1)) * size + node;
        if (seen[static_cast<size_t>(key)]) io_fail(path, "duplicate value row");
        seen[static_cast<size_t>(key)] = 1;
        field.slice(mode - 1, n)[static_cast<size_t>(node)] = cell_num(row, c_value, path);
    }
    return field;
}

SwitchPolicy read_policy_csv(const std::string& path, const Lattice& lat, int modes) {
    CsvFile f = read_csv(path);
    const int c_mode = column(f, path, "mode");
    const int c_time = column(f, path, "time_index");
    const int c_node = column(f, path, "node");
    const int c_action = column(f, path, "action");

    SwitchPolicy policy;
    policy.lat = lat;
    policy.modes = modes;
    const int64_t size = lat.size();
    policy.actions.assign(static_cast<size_t>(lat.time_steps + 1),
                          std::vector<int16_t>(static_cast<size_t>(modes) * size, kStay));
    const int64_t expect = static_cast<int64_t>(modes) * (lat.time_steps + 1) * size;
    if (static_cast<int64_t>(f.rows.size()) != expect)
        io_fail(path, "expected " + std::to_string(expect) + " policy rows, found " +
                          std::to_string(f.rows.size()));
    for (const auto& row : f.rows) {
        const int mode = static_cast<int>(cell_num(row, c_mode, path));
        const int n = static_cast<int>(cell_num(row, c_time, path));
        const int64_t node = static_cast<int64_t>(cell_num(row, c_node, path));
        const int action = static_cast<int>(cell_num(row, c_action, path));
        if (mode < 1 || mode > modes || n < 0 || n > lat.time_steps || node < 0 || node >= size)
            io_fail(path, "row addresses a node outside the lattice");
        if (action < 0 || action > modes) io_fail(path, "action outside 0..modes");
        policy.actions[static_cast<size_t>(n)][static_cast<size_t>(mode - 1) * size + node] =
            action == 0 ? kStay : static_cast<int16_t>(action - 1);
    }
    return policy;
}

}  // namespace switchgrid
