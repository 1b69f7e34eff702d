#include "nehari/diagram.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "nehari/error.hpp"

namespace nehari {

const char* to_string(BranchRole r) noexcept
{
    switch (r) {
    case BranchRole::Main: return "main";
    case BranchRole::Switched: return "switched";
    case BranchRole::Isola: return "isola";
    }
    return "unknown";
}

unsigned worker_count()
{
    if (const char* env = std::getenv("NEHARI_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                }
                catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    for (auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

AugmentedState state_of(const SolutionPoint& p)
{
    return {p.lambda, p.u};
}

Tangent direction(const AugmentedState& from, const AugmentedState& to)
{
    Tangent t{to.u, to.lambda - from.lambda};
    for (std::size_t i = 0; i < t.du.size(); ++i)
        t.du[i] -= from.u[i];
    t.normalize();
    return t;
}

std::vector<double> minus_u(std::span<const double> u)
{
    std::vector<double> b(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        b[i] = -u[i];
    return b;
}

class DiagramRunner {
public:
    explicit DiagramRunner(const RunConfig& cfg)
        : cfg_(cfg), weight_(make_weight(cfg)), mesh_(make_mesh(cfg, weight_)), d_(weight_, mesh_)
    {
        bundle_.config = cfg;
        loc_.tol = cfg.bisection_tol;
        loc_.newton = cfg.continuation.newton;
        sw_.amplitude = cfg.switch_amplitude;
        sw_.newton = cfg.continuation.newton;
        dedup_.newton = cfg.continuation.newton;
    }

    DiagramBundle run()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const double lambda1 = d_.principal_eigenvalue();
        bundle_.provenance["mesh"] = mesh_summary();
        bundle_.provenance["lambda_1"] = fmt(lambda1);
        bundle_.provenance["newton_tol"] = fmt(cfg_.continuation.newton.tol);
        bundle_.provenance["ds"] = fmt(cfg_.continuation.ds);

        try {
            run_main(lambda1);
        }
        catch (const std::exception& e) {
            bundle_.failures.push_back(std::string("main branch: ") + e.what());
        }
        if (cfg_.isola_sweep.enabled) {
            try {
                run_sweep(lambda1);
            }
            catch (const std::exception& e) {
                bundle_.failures.push_back(std::string("isola sweep: ") + e.what());
            }
        }

        std::size_t steps = 0, points = 0;
        for (const auto& r : bundle_.branches) {
            steps += static_cast<std::size_t>(r.branch.steps);
            points += r.branch.points.size();
        }
        bundle_.provenance["steps"] = std::to_string(steps);
        bundle_.provenance["points"] = std::to_string(points);
        bundle_.provenance["branches"] = std::to_string(bundle_.branches.size());
        bundle_.provenance["wall_time_s"] =
            fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return std::move(bundle_);
    }

private:
    std::string mesh_summary() const
    {
        const auto h = mesh_spacings(mesh_);
        std::ostringstream os;
        os << cfg_.mesh.type << " N=" << mesh_.interior() << " min_dx=" << fmt(*std::min_element(h.begin(), h.end()))
           << " max_dx=" << fmt(*std::max_element(h.begin(), h.end()));
        return os.str();
    }

    std::vector<Branch> known() const
    {
        std::vector<Branch> out;
        for (const auto& r : bundle_.branches)
            out.push_back(r.branch);
        return out;
    }

    void run_main(double lambda1)
    {
        const double lam0 = lambda1 - cfg_.start_offset;
        auto r = newton_fixed_lambda(d_, lam0, sine_seed(mesh_, sine_amplitude(d_, lam0)),
                                     cfg_.continuation.newton);
        if (!r.converged())
            throw Error(ErrorKind::CorrectorFailure, "no solution near the principal eigenvalue");
        const auto t = initial_tangent(d_, r.state, -1);
        BranchRecord rec;
        rec.id = "main";
        rec.role = BranchRole::Main;
        rec.seed = "sine";
        rec.branch = continue_branch(d_, make_point(d_, lam0, r.state.u, PointTag::BranchStart), t,
                                     cfg_.continuation);
        add_branch(std::move(rec), 0);
    }

    // Records the branch, locates its events and switches at branch points.
    void add_branch(BranchRecord rec, int depth)
    {
        rec.folds = fold_points(rec.branch);
        const auto changes = scan_sign_changes(rec.branch);
        std::vector<BifurcationEvent> pitchforks;
        if (cfg_.bifurcations) {
            for (std::size_t k : changes.bifurcations) {
                try {
                    auto ev = locate_bifurcation(d_, rec.branch, {k, k + 1}, loc_, false);
                    rec.branch.events.emplace_back(k, ev);
                    if (ev.kind == EventKind::Pitchfork || cfg_.switch_unclassified)
                        pitchforks.push_back(ev);
                }
                catch (const std::exception& e) {
                    bundle_.failures.push_back(rec.id + ": locating branch point after index " +
                                               std::to_string(k) + ": " + e.what());
                }
            }
        }
        for (std::size_t k : changes.folds) {
            try {
                auto ev = locate_bifurcation(d_, rec.branch, {k, k + 1}, loc_, true);
                ev.kind = EventKind::Fold;
                rec.branch.events.emplace_back(k, ev);
            }
            catch (const std::exception& e) {
                bundle_.failures.push_back(rec.id + ": locating fold after index " + std::to_string(k) + ": " +
                                           e.what());
            }
        }
        std::sort(rec.branch.events.begin(), rec.branch.events.end(),
                  [](const auto& a, const auto& b) { return a.second.arclength + a.first * 1e9 < b.second.arclength + b.first * 1e9; });
        for (const auto& [k, ev] : rec.branch.events) {
            if (ev.kind != EventKind::Fold)
                rec.branch.points[k].tag = PointTag::Bifurcation;
            bundle_.events.push_back({rec.id, ev});
        }
        const std::string id = rec.id;
        bundle_.branches.push_back(std::move(rec));

        if (depth >= cfg_.max_depth)
            return;
        int counter = 0;
        for (const auto& ev : pitchforks) {
            ++counter;
            spawn_children(id, ev, counter, depth);
        }
    }

    void spawn_children(const std::string& parent, const BifurcationEvent& ev, int counter, int depth)
    {
        const auto host = make_point(d_, ev.lambda_b, ev.u, PointTag::Bifurcation);
        SwitchResult sw;
        try {
            sw = switch_branch(d_, ev, host, sw_);
        }
        catch (const std::exception& e) {
            bundle_.failures.push_back(parent + ": switching at lambda " + fmt(ev.lambda_b) + ": " + e.what());
            return;
        }
        const AugmentedState at_b{ev.lambda_b, ev.u};
        std::vector<std::pair<std::string, AugmentedState>> legs{{"+", sw.plus}, {"-", sw.minus}};
        std::vector<Branch> children(legs.size());
        std::vector<char> skip(legs.size(), 0);
        const auto existing = known();
        for (std::size_t i = 0; i < legs.size(); ++i)
            skip[i] = on_known_branch(d_, legs[i].second.lambda, legs[i].second.u, existing, dedup_) ? 1 : 0;
        parallel_for(legs.size(), [&](std::size_t i) {
            if (skip[i])
                return;
            const auto& y = legs[i].second;
            const auto away = direction(at_b, y);
            const auto t = initial_tangent(d_, y, away);
            children[i] = continue_branch(d_, make_point(d_, y.lambda, y.u, PointTag::BranchStart), t,
                                          cfg_.continuation);
            // Join the child to the branch point.
            Branch& c = children[i];
            c.points.insert(c.points.begin(), host);
            c.tangents.insert(c.tangents.begin(), away);
            const auto j = d_.jacobian(at_b.lambda, at_b.u);
            c.det_j.insert(c.det_j.begin(), TridiagonalLU(j).det_sign());
            c.det_aug.insert(c.det_aug.begin(), bordered_det_sign(j, minus_u(at_b.u), away));
        });
        for (std::size_t i = 0; i < legs.size(); ++i) {
            if (skip[i])
                continue;
            BranchRecord rec;
            rec.id = parent + "/b" + std::to_string(counter) + legs[i].first;
            rec.role = BranchRole::Switched;
            rec.parent = parent;
            rec.seed = std::string("switch amplitude ") + fmt(sw.amplitude) + (sw.used_fallback ? " (constrained)" : "");
            // The joined first segment crosses the parent's branch point; skip it when scanning.
            Branch& c = children[i];
            if (c.det_aug.size() > 1)
                c.det_aug[0] = c.det_aug[1];
            if (c.det_j.size() > 1)
                c.det_j[0] = c.det_j[1];
            rec.branch = std::move(c);
            add_branch(std::move(rec), depth + 1);
        }
    }

    void run_sweep(double lambda1)
    {
        struct Seed {
            std::string label;
            std::optional<PeakMask> mask;
            PeakPlacement placement = PeakPlacement::Center;
            double offset = 0.0;
            std::vector<bool> wells;
        };
        std::vector<Seed> seeds;
        std::vector<PeakMask> masks;
        if (cfg_.isola_sweep.masks.empty()) {
            masks = enumerate_masks(cfg_.kappa);
        }
        else {
            for (const auto& s : cfg_.isola_sweep.masks) {
                masks.push_back(PeakMask::from_string(s));
                if (masks.back().bits.size() != static_cast<std::size_t>(cfg_.kappa) + 1)
                    throw Error(ErrorKind::MaskMismatch, "mask " + s + " does not match kappa");
            }
        }
        // Peaks far from the walls are pinned weakly and have small Newton
        // basins: besides the centered seed, each mask is tried with peaks at
        // their force-balance positions (translation-pinned Newton) and at
        // optional distances from the well edges.
        const std::pair<PeakPlacement, const char*> edges[] = {{PeakPlacement::Inward, "/in"},
                                                               {PeakPlacement::Outward, "/out"}};
        for (const auto& m : masks) {
            seeds.push_back({m.to_string(), m, PeakPlacement::Center, 0.0, {}});
            seeds.push_back({m.to_string() + "/balanced", m, PeakPlacement::Balanced, 0.0, {}});
            for (const auto& [p, suffix] : edges) {
                for (double k : cfg_.isola_sweep.edge_offsets)
                    seeds.push_back({m.to_string() + suffix + fmt(k), m, p, k, {}});
            }
        }
        if (cfg_.eps > 0.0 && cfg_.isola_sweep.well_seeds) {
            const unsigned width = static_cast<unsigned>(cfg_.kappa);
            for (unsigned long v = 1; v < (1UL << width); ++v) {
                std::vector<bool> bits;
                std::string label = "well:";
                for (unsigned j = 0; j < width; ++j) {
                    bits.push_back(((v >> j) & 1UL) != 0);
                    label.push_back(bits.back() ? '1' : '0');
                }
                seeds.push_back({label, std::nullopt, PeakPlacement::Center, 0.0, bits});
            }
        }

        int isola_count = 0, extension_count = 0;
        for (double lam : cfg_.isola_sweep.lambda_grid) {
            if (!(lam < lambda1) || lam < cfg_.continuation.lambda_min)
                continue;
            // Masks already carried by some known solution at this lambda.
            std::vector<PeakMask> represented;
            for (const auto& r : bundle_.branches) {
                for (const auto& u : solutions_at(d_, r.branch, lam, cfg_.continuation.newton))
                    represented.push_back(peak_mask_of(d_, u));
            }
            std::vector<std::optional<NewtonResult>> results(seeds.size());
            parallel_for(seeds.size(), [&](std::size_t i) {
                const auto& s = seeds[i];
                if (s.mask && std::find(represented.begin(), represented.end(), *s.mask) != represented.end())
                    return;
                if (!s.mask) {
                    results[i] = newton_fixed_lambda(d_, lam, well_seed(weight_, mesh_, s.wells, lam),
                                                     cfg_.continuation.newton);
                    return;
                }
                Profile seed = peak_pattern_seed(weight_, mesh_, *s.mask, lam, s.placement, s.offset);
                if (s.placement == PeakPlacement::Balanced) {
                    results[i] = pinned_newton(
                        d_, lam, std::move(seed),
                        peak_translation_modes(weight_, mesh_, *s.mask, lam, s.placement, s.offset),
                        cfg_.continuation.newton);
                }
                else {
                    results[i] = newton_fixed_lambda(d_, lam, std::move(seed), cfg_.continuation.newton);
                }
            });
            for (std::size_t i = 0; i < seeds.size(); ++i) {
                if (!results[i] || !results[i]->converged())
                    continue;
                const auto& u = results[i]->state.u;
                if (*std::min_element(u.begin(), u.end()) < -1e-8 || *std::max_element(u.begin(), u.end()) < 1e-8)
                    continue;
                if (on_known_branch(d_, lam, u, known(), dedup_))
                    continue;
                BranchRecord rec;
                rec.seed = seeds[i].label + " at lambda " + fmt(lam);
                std::optional<std::size_t> host;
                auto joins = [&](const SolutionPoint& p) {
                    for (std::size_t r = 0; r < bundle_.branches.size(); ++r) {
                        if (on_known_branch(d_, p.lambda, p.u, {bundle_.branches[r].branch}, dedup_)) {
                            host = r;
                            return true;
                        }
                    }
                    return false;
                };
                rec.branch = continue_both_ways(d_, make_point(d_, lam, u, PointTag::BranchStart),
                                                cfg_.continuation, joins);
                if (host) {
                    // Bridges the gap left by a branch whose continuation stopped early.
                    const auto& h = bundle_.branches[*host];
                    rec.id = h.id + "/ext" + std::to_string(++extension_count);
                    rec.role = h.role;
                    rec.parent = h.id;
                }
                else {
                    rec.id = "isola" + std::to_string(++isola_count);
                    rec.role = BranchRole::Isola;
                }
                add_branch(std::move(rec), 0);
            }
        }
    }

    RunConfig cfg_;
    Weight weight_;
    Mesh mesh_;
    Discretization d_;
    DiagramBundle bundle_;
    LocateOptions loc_;
    SwitchOptions sw_;
    DedupOptions dedup_;
};

}  // namespace

Weight make_weight(const RunConfig& cfg)
{
    return build_weight(cfg.kappa, cfg.h, cfg.eps, cfg.centers, !cfg.allow_asymmetric);
}

Mesh make_mesh(const RunConfig& cfg, const Weight& w)
{
    if (cfg.mesh.type == "uniform")
        return build_uniform_mesh(cfg.mesh.n);
    if (cfg.mesh.type == "refined") {
        return cfg.mesh.pad ? build_refined_mesh(w, cfg.mesh.coarse_dx, cfg.mesh.fine_dx, *cfg.mesh.pad)
                            : build_refined_mesh(w, cfg.mesh.coarse_dx, cfg.mesh.fine_dx);
    }
    throw Error(ErrorKind::Config, "unknown mesh type '" + cfg.mesh.type + "'");
}

DiagramBundle run_diagram(const RunConfig& cfg)
{
    cfg.continuation.validate();
    return DiagramRunner(cfg).run();
}

Branch continue_both_ways(const Discretization& d, const SolutionPoint& start, const ContinuationConfig& cfg,
                          const std::function<bool(const SolutionPoint&)>& joins)
{
    const AugmentedState y = state_of(start);
    const Tangent t = initial_tangent(d, y, +1);
    auto cut = [&](Branch& b) {
        if (!joins)
            return;
        // Checks every few points, then backs up to the first joined one.
        constexpr std::size_t stride = 8;
        const std::size_t n = b.points.size();
        std::size_t hit = n;
        for (std::size_t k = stride; k < n + stride - 1 && hit == n; k += stride) {
            const std::size_t j = std::min(k, n - 1);
            if (joins(b.points[j])) {
                hit = j;
                for (std::size_t q = j > stride ? j - stride + 1 : 1; q < j; ++q) {
                    if (joins(b.points[q])) {
                        hit = q;
                        break;
                    }
                }
            }
        }
        if (hit == n)
            return;
        b.points.resize(hit + 1);
        b.tangents.resize(hit + 1);
        b.det_j.resize(hit + 1);
        b.det_aug.resize(hit + 1);
        b.stop = StopReason::JoinedBranch;
        b.diagnostic.clear();
    };
    Branch fwd = continue_branch(d, start, t, cfg);
    cut(fwd);
    if (fwd.stop == StopReason::ClosedLoop)
        return fwd;
    Branch bwd = continue_branch(d, start, -t, cfg);
    cut(bwd);

    Branch out;
    const std::size_t nb = bwd.points.size();
    for (std::size_t k = nb; k-- > 1;) {
        out.points.push_back(std::move(bwd.points[k]));
        out.tangents.push_back(-bwd.tangents[k]);
        out.det_j.push_back(bwd.det_j[k]);
        out.det_aug.push_back(-bwd.det_aug[k]);
    }
    for (std::size_t k = 0; k < fwd.points.size(); ++k) {
        out.points.push_back(std::move(fwd.points[k]));
        out.tangents.push_back(std::move(fwd.tangents[k]));
        out.det_j.push_back(fwd.det_j[k]);
        out.det_aug.push_back(fwd.det_aug[k]);
    }
    auto describe = [](const Branch& b) {
        return std::string(to_string(b.stop)) + (b.diagnostic.empty() ? "" : " (" + b.diagnostic + ")");
    };
    out.stop = fwd.stop;
    out.diagnostic = "forward: " + describe(fwd) + "; backward: " + describe(bwd);
    out.steps = fwd.steps + bwd.steps;
    out.rejected = fwd.rejected + bwd.rejected;
    for (const auto& [k, lam] : fold_points(out))
        out.points[k].tag = PointTag::Fold;
    out.symmetry = classify_symmetry(d, out);
    return out;
}

std::vector<Profile> solutions_at(const Discretization& d, const Branch& b, double lambda, const NewtonOptions& opt)
{
    std::vector<Profile> out;
    const auto& p = b.points;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const double l0 = p[k].lambda, l1 = p[k + 1].lambda;
        if (!((l0 - lambda) * (l1 - lambda) <= 0.0) || l0 == l1)
            continue;
        if (l1 == lambda)
            continue;  // counted by the next pair
        const double w = (lambda - l0) / (l1 - l0);
        Profile guess(p[k].u.size());
        for (std::size_t i = 0; i < guess.size(); ++i)
            guess[i] = p[k].u[i] + w * (p[k + 1].u[i] - p[k].u[i]);
        auto r = newton_fixed_lambda(d, lambda, std::move(guess), opt);
        if (r.converged())
            out.push_back(std::move(r.state.u));
    }
    return out;
}

std::optional<double> isola_turning_point(const DiagramBundle& b)
{
    std::optional<double> best;
    for (const auto& r : b.branches) {
        if (r.role != BranchRole::Isola)
            continue;
        bool have_event = false;
        for (const auto& [k, ev] : r.branch.events) {
            if (ev.kind == EventKind::Fold) {
                have_event = true;
                if (!best || ev.lambda_b > *best)
                    best = ev.lambda_b;
            }
        }
        if (!have_event) {
            for (const auto& [k, lam] : r.folds) {
                if (!best || lam > *best)
                    best = lam;
            }
        }
    }
    return best;
}

double validate_bundle(const DiagramBundle& b)
{
    const auto w = make_weight(b.config);
    Discretization d(w, make_mesh(b.config, w));
    double worst = 0.0;
    for (const auto& r : b.branches) {
        for (const auto& p : r.branch.points)
            worst = std::max(worst, norm2(d.residual(p.lambda, p.u)));
    }
    return worst;
}

EpsilonSweep run_epsilon_sweep(const RunConfig& base, const std::vector<double>& eps_values)
{
    EpsilonSweep out;
    for (double eps : eps_values) {
        RunConfig cfg = base;
        cfg.eps = eps;
        SweepReportRow row;
        row.eps = eps;
        row.probe_lambda = base.probe_lambda;
        try {
            auto bundle = run_diagram(cfg);
            const auto w = make_weight(cfg);
            Discretization d(w, make_mesh(cfg, w));
            for (const auto& r : bundle.branches) {
                for (const auto& u : solutions_at(d, r.branch, base.probe_lambda, cfg.continuation.newton)) {
                    if (asymmetry(u) > 1e-6)
                        continue;
                    const int peaks = static_cast<int>(peak_indices(u).size());
                    if (r.role == BranchRole::Main && row.main_peaks < 0)
                        row.main_peaks = peaks;
                    if (r.role == BranchRole::Isola)
                        row.isola_peaks = std::max(row.isola_peaks, peaks);
                }
            }
            row.lambda_t = isola_turning_point(bundle);
            for (const auto& f : bundle.failures)
                row.note += (row.note.empty() ? "" : "; ") + f;
            out.bundles.push_back(std::move(bundle));
        }
        catch (const std::exception& e) {
            row.note = e.what();
        }
        out.report.push_back(row);
    }
    return out;
}

std::vector<HSweepRow> run_h_sweep(const RunConfig& base, const std::vector<double>& h_values)
{
    std::vector<HSweepRow> out;
    for (double h : h_values) {
        RunConfig cfg = base;
        cfg.h = h;
        cfg.isola_sweep.enabled = false;
        cfg.max_depth = 0;
        HSweepRow row;
        row.h = h;
        try {
            const auto bundle = run_diagram(cfg);
            for (const auto& e : bundle.events) {
                if (e.branch_id == "main" && e.event.kind != EventKind::Fold) {
                    row.lambda_b = e.event.lambda_b;
                    break;
                }
            }
            for (const auto& f : bundle.failures)
                row.note += (row.note.empty() ? "" : "; ") + f;
        }
        catch (const std::exception& e) {
            row.note = e.what();
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace nehari
