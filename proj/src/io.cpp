#include "nehari/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "nehari/error.hpp"

namespace nehari {

using nlohmann::json;

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
            throw Error(ErrorKind::Config, where_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end())
            return;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number())
                    throw Error(ErrorKind::Config, "not a number");
                out = it->template get<double>();
            }
            else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::size_t>) {
                if (!it->is_number_integer())
                    throw Error(ErrorKind::Config, "not an integer");
                const auto v = it->template get<long long>();
                if constexpr (std::is_same_v<T, std::size_t>) {
                    if (v < 0)
                        throw Error(ErrorKind::Config, "negative");
                }
                out = static_cast<T>(v);
            }
            else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean())
                    throw Error(ErrorKind::Config, "not a boolean");
                out = it->template get<bool>();
            }
            else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string())
                    throw Error(ErrorKind::Config, "not a string");
                out = it->template get<std::string>();
            }
            else {
                out = it->template get<T>();
            }
        }
        catch (const Error& e) {
            throw Error(ErrorKind::Config, where_ + "." + key + ": " + e.what());
        }
        catch (const json::exception& e) {
            throw Error(ErrorKind::Config, where_ + "." + key + ": " + e.what());
        }
    }

    template <class T>
    void get_optional(const char* key, std::optional<T>& out)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end() || it->is_null())
            return;
        T v{};
        seen_.erase(key);
        get(key, v);
        out = v;
    }

    const json* child(const char* key)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const
    {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k))
                throw Error(ErrorKind::Config, "unknown key " + where_ + "." + k);
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string, std::less<>> seen_;
};

void read_newton(const json& j, NewtonOptions& n)
{
    ObjectReader r(j, "continuation.newton");
    r.get("tol", n.tol);
    r.get("max_iters", n.max_iters);
    r.get("divergence_factor", n.divergence_factor);
    r.get("singular_pivot", n.singular_pivot);
    r.finish();
}

void read_continuation(const json& j, ContinuationConfig& c)
{
    ObjectReader r(j, "continuation");
    r.get("ds", c.ds);
    r.get("ds_min", c.ds_min);
    r.get("lambda_min", c.lambda_min);
    std::optional<double> lambda_max;
    r.get_optional("lambda_max", lambda_max);  // null: unbounded
    if (lambda_max)
        c.lambda_max = *lambda_max;
    r.get("norm_max", c.norm_max);
    r.get("max_steps", c.max_steps);
    r.get("positivity_tol", c.positivity_tol);
    r.get("loop_tol", c.loop_tol);
    r.get("grow_after", c.grow_after);
    if (const json* n = r.child("newton"))
        read_newton(*n, c.newton);
    r.finish();
}

void read_mesh(const json& j, MeshConfig& m)
{
    ObjectReader r(j, "mesh");
    r.get("type", m.type);
    r.get("n", m.n);
    r.get("coarse_dx", m.coarse_dx);
    r.get("fine_dx", m.fine_dx);
    r.get_optional("pad", m.pad);
    r.finish();
}

void read_sweep(const json& j, SweepConfig& s)
{
    ObjectReader r(j, "isola_sweep");
    r.get("enabled", s.enabled);
    r.get("lambda_grid", s.lambda_grid);
    r.get("masks", s.masks);
    r.get("well_seeds", s.well_seeds);
    r.get("edge_offsets", s.edge_offsets);
    r.finish();
}

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json to_json(const RunConfig& c)
{
    const auto& k = c.continuation;
    return json{
        {"kappa", c.kappa},
        {"h", c.h},
        {"eps", c.eps},
        {"centers", c.centers ? json(*c.centers) : json(nullptr)},
        {"allow_asymmetric", c.allow_asymmetric},
        {"mesh",
         {{"type", c.mesh.type},
          {"n", c.mesh.n},
          {"coarse_dx", c.mesh.coarse_dx},
          {"fine_dx", c.mesh.fine_dx},
          {"pad", optional_json(c.mesh.pad)}}},
        {"continuation",
         {{"ds", k.ds},
          {"ds_min", k.ds_min},
          {"lambda_min", k.lambda_min},
          {"lambda_max", finite_or_null(k.lambda_max)},
          {"norm_max", k.norm_max},
          {"max_steps", k.max_steps},
          {"positivity_tol", k.positivity_tol},
          {"loop_tol", k.loop_tol},
          {"grow_after", k.grow_after},
          {"newton",
           {{"tol", k.newton.tol},
            {"max_iters", k.newton.max_iters},
            {"divergence_factor", k.newton.divergence_factor},
            {"singular_pivot", k.newton.singular_pivot}}}}},
        {"start_offset", c.start_offset},
        {"bifurcations", c.bifurcations},
        {"bisection_tol", c.bisection_tol},
        {"switch_amplitude", optional_json(c.switch_amplitude)},
        {"max_depth", c.max_depth},
        {"switch_unclassified", c.switch_unclassified},
        {"isola_sweep",
         {{"enabled", c.isola_sweep.enabled},
          {"lambda_grid", c.isola_sweep.lambda_grid},
          {"masks", c.isola_sweep.masks},
          {"well_seeds", c.isola_sweep.well_seeds},
          {"edge_offsets", c.isola_sweep.edge_offsets}}},
        {"probe_lambda", c.probe_lambda},
        {"profile_stride", c.profile_stride},
    };
}

json to_json(const BifurcationEvent& e, const std::string& branch_id)
{
    return json{{"lambda_b", e.lambda_b},
                {"kind", to_string(e.kind)},
                {"branch_index", e.branch_index},
                {"branch_id", branch_id},
                {"arclength", e.arclength},
                {"sigma_min_rel", e.sigma_min_rel},
                {"fold_indicator", e.fold_indicator}};
}

bool wants_profile(const Branch& b, std::size_t k, int stride)
{
    if (k == 0 || k + 1 == b.points.size())
        return true;
    if (b.points[k].tag != PointTag::Regular)
        return true;
    return stride > 0 && k % static_cast<std::size_t>(stride) == 0;
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::Io, "cannot open " + p.string() + " for writing");
    f << text;
    if (!f)
        throw Error(ErrorKind::Io, "write to " + p.string() + " failed");
}

// 1-2-5 tick spacing with roughly `target` ticks over [lo, hi].
double tick_step(double lo, double hi, int target)
{
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw)
            return m * mag;
    }
    return 10.0 * mag;
}

std::string px(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v, double step)
{
    char buf[32];
    const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
    std::snprintf(buf, sizeof buf, "%.*f", digits, std::abs(v) < 0.5 * step * 1e-9 ? 0.0 : v);
    return buf;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    }
    catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    RunConfig c;
    ObjectReader r(j, "config");
    r.get("kappa", c.kappa);
    r.get("h", c.h);
    r.get("eps", c.eps);
    if (const json* centers = r.child("centers"); centers && !centers->is_null()) {
        try {
            c.centers = centers->get<std::vector<double>>();
        }
        catch (const json::exception& e) {
            throw Error(ErrorKind::Config, std::string("config.centers: ") + e.what());
        }
    }
    r.get("allow_asymmetric", c.allow_asymmetric);
    if (const json* m = r.child("mesh"))
        read_mesh(*m, c.mesh);
    if (const json* k = r.child("continuation"))
        read_continuation(*k, c.continuation);
    r.get("start_offset", c.start_offset);
    r.get("bifurcations", c.bifurcations);
    r.get("bisection_tol", c.bisection_tol);
    r.get_optional("switch_amplitude", c.switch_amplitude);
    r.get("max_depth", c.max_depth);
    r.get("switch_unclassified", c.switch_unclassified);
    if (const json* s = r.child("isola_sweep"))
        read_sweep(*s, c.isola_sweep);
    r.get("probe_lambda", c.probe_lambda);
    r.get("profile_stride", c.profile_stride);
    r.finish();

    if (c.kappa < 1)
        throw Error(ErrorKind::Config, "kappa must be at least 1");
    if (!(c.eps >= 0.0 && c.eps <= 1.0))
        throw Error(ErrorKind::Config, "eps must lie in [0, 1]");
    if (c.max_depth < 0 || c.profile_stride < 0)
        throw Error(ErrorKind::Config, "max_depth and profile_stride must be non-negative");
    if (c.mesh.type != "uniform" && c.mesh.type != "refined")
        throw Error(ErrorKind::Config, "mesh.type must be \"uniform\" or \"refined\"");
    c.continuation.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

std::string config_json(const RunConfig& cfg, int indent)
{
    return to_json(cfg).dump(indent);
}

std::string bundle_json(const DiagramBundle& b, int indent)
{
    json branches = json::array();
    for (const auto& r : b.branches) {
        json pts = json::array();
        for (const auto& p : r.branch.points)
            pts.push_back({{"lambda", p.lambda}, {"l2_norm", p.l2norm}, {"tag", to_string(p.tag)}});
        json folds = json::array();
        for (const auto& [k, lam] : r.folds)
            folds.push_back({{"index", k}, {"lambda", lam}});
        branches.push_back({{"id", r.id},
                            {"role", to_string(r.role)},
                            {"parent", r.parent},
                            {"seed", r.seed},
                            {"symmetry", to_string(r.branch.symmetry)},
                            {"stop", to_string(r.branch.stop)},
                            {"diagnostic", r.branch.diagnostic},
                            {"steps", r.branch.steps},
                            {"rejected", r.branch.rejected},
                            {"folds", folds},
                            {"points", pts}});
    }
    json events = json::array();
    for (const auto& e : b.events)
        events.push_back(to_json(e.event, e.branch_id));
    json out{{"config", to_json(b.config)},
             {"provenance", b.provenance},
             {"failures", b.failures},
             {"branches", branches},
             {"events", events}};
    return out.dump(indent);
}

std::string branches_csv(const DiagramBundle& b)
{
    std::string out = "branch_id,point_index,lambda,l2_norm,tag\n";
    for (const auto& r : b.branches) {
        for (std::size_t k = 0; k < r.branch.points.size(); ++k) {
            const auto& p = r.branch.points[k];
            out += r.id + ',' + std::to_string(k) + ',' + g17(p.lambda) + ',' + g17(p.l2norm) + ',' +
                   to_string(p.tag) + '\n';
        }
    }
    return out;
}

std::string events_jsonl(const DiagramBundle& b)
{
    std::string out;
    for (const auto& e : b.events)
        out += to_json(e.event, e.branch_id).dump() + '\n';
    return out;
}

std::string branch_file_stem(const std::string& id)
{
    std::string s = id;
    std::replace(s.begin(), s.end(), '/', '.');
    return s;
}

std::string profile_text(const Mesh& m, const Profile& u, const std::string& header)
{
    if (u.size() != m.interior())
        throw Error(ErrorKind::Size, "profile length does not match the mesh");
    std::string out;
    if (!header.empty())
        out += "# " + header + '\n';
    const auto& x = m.nodes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = i == 0 || i + 1 == x.size() ? 0.0 : u[i - 1];
        out += g17(x[i]) + ' ' + g17(v) + '\n';
    }
    return out;
}

std::string emit_svg(const DiagramBundle& b, const AxesConfig& axes)
{
    static constexpr const char* hues[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                           "#17becf", "#8c564b", "#e377c2", "#bcbd22"};
    const double W = axes.width, H = axes.height;
    const double left = 70, right = 20, top = 20, bottom = 50;

    double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin, nmax = 0.0;
    for (const auto& r : b.branches) {
        for (const auto& p : r.branch.points) {
            lmin = std::min(lmin, p.lambda);
            lmax = std::max(lmax, p.lambda);
            nmax = std::max(nmax, p.l2norm);
        }
    }
    if (!std::isfinite(lmin)) {
        lmin = -100.0;
        lmax = 10.0;
        nmax = 1.0;
    }
    if (lmax - lmin <= 0.0) {
        lmin -= 1.0;
        lmax += 1.0;
    }
    if (nmax <= 0.0)
        nmax = 1.0;
    const double pad = 0.03 * (lmax - lmin);
    const double x0 = axes.lambda_lo.value_or(lmin - pad), x1 = axes.lambda_hi.value_or(lmax + pad);
    const double y0 = axes.norm_lo.value_or(0.0), y1 = axes.norm_hi.value_or(1.05 * nmax);
    if (!(x1 > x0) || !(y1 > y0))
        throw Error(ErrorKind::Config, "empty axis range");

    auto sx = [&](double l) { return left + (l - x0) / (x1 - x0) * (W - left - right); };
    auto sy = [&](double n) { return H - bottom - (n - y0) / (y1 - y0) * (H - top - bottom); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << axes.width << "\" height=\"" << axes.height
       << "\" viewBox=\"0 0 " << axes.width << ' ' << axes.height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<defs><clipPath id=\"plot\"><rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\""
       << px(W - left - right) << "\" height=\"" << px(H - top - bottom) << "\"/></clipPath></defs>\n";

    // Axes and ticks.
    os << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<line x1=\"" << px(left) << "\" y1=\"" << px(H - bottom) << "\" x2=\"" << px(W - right) << "\" y2=\""
       << px(H - bottom) << "\"/>\n"
       << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\"" << px(left) << "\" y2=\""
       << px(H - bottom) << "\"/>\n";
    const double xs = tick_step(x0, x1, 8);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        os << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(H - bottom) << "\" x2=\"" << px(sx(t)) << "\" y2=\""
           << px(H - bottom + 5) << "\"/>"
           << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(H - bottom + 18)
           << "\" text-anchor=\"middle\" stroke=\"none\">" << tick_label(t, xs) << "</text>\n";
    }
    const double ys = tick_step(y0, y1, 6);
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(left) << "\" y2=\""
           << px(sy(t)) << "\"/>"
           << "<text x=\"" << px(left - 8) << "\" y=\"" << px(sy(t) + 4)
           << "\" text-anchor=\"end\" stroke=\"none\">" << tick_label(t, ys) << "</text>\n";
    }
    os << "<text x=\"" << px(0.5 * (left + W - right)) << "\" y=\"" << px(H - 10)
       << "\" text-anchor=\"middle\" stroke=\"none\">lambda</text>\n"
       << "<text x=\"15\" y=\"" << px(0.5 * (top + H - bottom)) << "\" text-anchor=\"middle\" stroke=\"none\" "
       << "transform=\"rotate(-90 15 " << px(0.5 * (top + H - bottom)) << ")\">||u||_2</text>\n"
       << "</g>\n";

    // Branches.
    os << "<g id=\"branches\" fill=\"none\" stroke-width=\"1.5\" clip-path=\"url(#plot)\">\n";
    std::size_t isola = 0;
    for (const auto& r : b.branches) {
        const char* colour = r.role == BranchRole::Main       ? "#000000"
                             : r.role == BranchRole::Switched ? "#d62728"
                                                              : hues[isola++ % std::size(hues)];
        os << "<polyline data-branch=\"" << xml_escape(r.id) << "\" stroke=\"" << colour << "\" points=\"";
        for (std::size_t k = 0; k < r.branch.points.size(); ++k) {
            const auto& p = r.branch.points[k];
            os << (k ? " " : "") << px(sx(p.lambda)) << ',' << px(sy(p.l2norm));
        }
        os << "\"/>\n";
    }
    os << "</g>\n";

    // Branch points (folds are regular points of the diagram and are not marked).
    std::optional<Mesh> mesh;
    try {
        mesh = make_mesh(b.config, make_weight(b.config));
    }
    catch (const Error&) {
    }
    os << "<g id=\"events\" fill=\"white\" stroke=\"black\" stroke-width=\"2.5\">\n";
    for (const auto& e : b.events) {
        if (e.event.kind == EventKind::Fold)
            continue;
        double norm = 0.0;
        if (mesh && e.event.u.size() == mesh->interior()) {
            norm = discrete_l2_norm(*mesh, e.event.u);
        }
        else {
            for (const auto& r : b.branches)
                if (r.id == e.branch_id && e.event.branch_index < r.branch.points.size())
                    norm = r.branch.points[e.event.branch_index].l2norm;
        }
        os << "<circle data-kind=\"" << to_string(e.event.kind) << "\" cx=\"" << px(sx(e.event.lambda_b))
           << "\" cy=\"" << px(sy(norm)) << "\" r=\"5\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

void write_bundle(const DiagramBundle& b, const std::filesystem::path& dir, const AxesConfig& axes)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "profiles", ec);
    if (ec)
        throw Error(ErrorKind::Io, "cannot create " + (dir / "profiles").string() + ": " + ec.message());
    write_file(dir / "bundle.json", bundle_json(b) + '\n');
    write_file(dir / "branches.csv", branches_csv(b));
    write_file(dir / "events.jsonl", events_jsonl(b));
    write_file(dir / "diagram.svg", emit_svg(b, axes));

    const auto w = make_weight(b.config);
    const auto m = make_mesh(b.config, w);
    for (const auto& r : b.branches) {
        for (std::size_t k = 0; k < r.branch.points.size(); ++k) {
            if (!wants_profile(r.branch, k, b.config.profile_stride))
                continue;
            const auto& p = r.branch.points[k];
            const std::string header = "branch " + r.id + " index " + std::to_string(k) + " lambda " +
                                       g17(p.lambda) + " l2_norm " + g17(p.l2norm) + " tag " + to_string(p.tag);
            write_file(dir / "profiles" / (branch_file_stem(r.id) + "_" + std::to_string(k) + ".txt"),
                       profile_text(m, p.u, header));
        }
    }
}

}  // namespace nehari
