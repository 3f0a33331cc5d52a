#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "maass/cli.hpp"
#include "maass/errors.hpp"
#include "maass/modgroup.hpp"

namespace maass::cli {

namespace {

std::atomic<bool> g_stop{false};

unsigned thread_count(const RunConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on a pool; items not started before a stop request are skipped.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; !stop_requested() && (i = next++) < n;) fn(i);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const LostMinimumError*>(&e)) return "rejected";
    if (dynamic_cast<const PrecisionError*>(&e) || dynamic_cast<const WindowError*>(&e)) return "precision";
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const IterationLimitError*>(&e)) return "convergence";
    return "error";
}

RefineOptions refine_options(const RunConfig& cfg, double R) {
    RefineOptions opt;
    opt.tol = cfg.tol;
    opt.trunc_eps = cfg.trunc_eps;
    if (cfg.n_points > 0 || cfg.y0 > 0) {
        LocatorConfig lc = default_config(cfg.level, R, cfg.trunc_eps);
        if (cfg.y0 > 0) {
            lc.y0 = cfg.y0;
            lc.M = truncation_order(R + 0.5, cfg.y0, cfg.trunc_eps);
            lc.n_points = 4 * lc.M + 8;
        }
        if (cfg.n_points > 0) lc.n_points = cfg.n_points;
        opt.config = lc;
    }
    return opt;
}

json base_manifest(const RunConfig& cfg, const std::vector<SymmetryType>& syms) {
    json m;
    m["format"] = "maass-lab-store/1";
    m["level"] = cfg.level;
    m["R_lo"] = format_real(cfg.r_lo);
    m["R_hi"] = format_real(cfg.r_hi);
    json names = json::array();
    for (const auto& s : syms) names.push_back(s.name());
    m["symmetries"] = names;
    m["config"] = config_json(cfg);
    m["complete"] = true;
    m["failures"] = json::array();
    m["zgrids"] = json::array();
    m["lfun_failures"] = json::object();
    m["series"] = json::array();
    m["audit"] = {{"status", "not-run"}};
    return m;
}

json forms_summary(const std::vector<MaassForm>& forms) {
    json a = json::array();
    for (const auto& f : forms) {
        a.push_back({{"id", form_id(f)}, {"symmetry", f.symmetry.name()}, {"R", format_real(f.R)},
                     {"oldform", f.is_oldform}});
    }
    return a;
}

void mark_oldforms(std::vector<MaassForm>& forms, const RunConfig& cfg, double lo, double hi) {
    if (cfg.level == 1 || !cfg.oldforms || forms.empty()) return;
    const auto level1 = level_one_spectrum(lo, hi, cfg);
    for (auto& f : forms) f.is_oldform = classify_oldform(f, level1);
}

void print_table(std::ostream& out, const std::vector<SymmetryType>& syms, const std::vector<MaassForm>& forms) {
    std::vector<std::vector<const MaassForm*>> cols(syms.size());
    for (const auto& f : forms)
        for (std::size_t k = 0; k < syms.size(); ++k)
            if (f.symmetry == syms[k]) cols[k].push_back(&f);
    std::size_t rows = 0;
    for (auto& c : cols) {
        std::sort(c.begin(), c.end(), [](auto* a, auto* b) { return a->R < b->R; });
        rows = std::max(rows, c.size());
    }
    char buf[64];
    for (const auto& s : syms) {
        std::snprintf(buf, sizeof buf, "%-18s", s.name().c_str());
        out << buf;
    }
    out << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (const auto& c : cols) {
            if (r < c.size()) std::snprintf(buf, sizeof buf, "%-18s", (fmt("%.11f", c[r]->R) + (c[r]->is_oldform ? "*" : "")).c_str());
            else std::snprintf(buf, sizeof buf, "%-18s", "");
            out << buf;
        }
        out << "\n";
    }
    out << forms.size() << " forms";
    if (std::any_of(forms.begin(), forms.end(), [](const MaassForm& f) { return f.is_oldform; })) {
        out << " (* oldform from level 1)";
    }
    out << "\n";
}

std::vector<MaassForm> load_forms_checked(const Store& store, const json& manifest) {
    auto forms = store.load_forms();
    if (manifest.contains("level")) {
        for (const auto& f : forms)
            if (f.level != manifest["level"].get<std::int64_t>()) throw ConfigError("form level differs from manifest level");
    }
    return forms;
}

void add_unique(json& array, const std::string& name) {
    for (const auto& x : array)
        if (x.get<std::string>() == name) return;
    array.push_back(name);
    std::vector<std::string> v = array.get<std::vector<std::string>>();
    std::sort(v.begin(), v.end());
    array = v;
}

std::string class_code(const SymmetryType& s) {
    const auto n = s.name();
    return n.substr(0, n.size() - 1) + (s.fricke_sign > 0 ? "p" : "m");
}

CsvSeries cdf_series(const std::vector<double>& sample, const std::vector<std::string>& extra_names,
                     const std::vector<std::function<double(double)>>& extra) {
    CsvSeries s;
    s.columns = {"x", "cdf"};
    for (const auto& n : extra_names) s.columns.push_back(n);
    const auto e = empirical_cdf(sample);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        std::vector<double> row{e.values[i], e.cdf[i]};
        for (const auto& f : extra) row.push_back(f(e.values[i]));
        s.rows.push_back(std::move(row));
    }
    return s;
}

std::function<double(double)> empirical(std::vector<double> ref) {
    std::sort(ref.begin(), ref.end());
    return [ref = std::move(ref)](double x) {
        return static_cast<double>(std::upper_bound(ref.begin(), ref.end(), x) - ref.begin()) / ref.size();
    };
}

}  // namespace

void request_stop() { g_stop = true; }
bool stop_requested() { return g_stop; }

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NotFoundError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e) ||
        dynamic_cast<const BoundaryError*>(&e)) {
        return kMissing;
    }
    if (dynamic_cast<const PrecisionError*>(&e) || dynamic_cast<const ConvergenceError*>(&e) ||
        dynamic_cast<const IterationLimitError*>(&e) || dynamic_cast<const LostMinimumError*>(&e) ||
        dynamic_cast<const WindowError*>(&e)) {
        return kPrecision;
    }
    if (dynamic_cast<const Error*>(&e)) return kValidation;
    return 1;
}

std::vector<LevelOneEigenvalue> level_one_spectrum(double lo, double hi, const RunConfig& cfg) {
    const std::string path = cache_dir(cfg) + "/level1_" + format_real(lo) + "_" + format_real(hi) + "_" +
                             format_real(cfg.trunc_eps) + ".json";
    std::vector<LevelOneEigenvalue> out;
    if (std::filesystem::exists(path)) {
        const json j = json::parse(read_file(path));
        for (const auto& e : j.at("eigenvalues")) {
            out.push_back({std::strtod(e.at("R").get<std::string>().c_str(), nullptr),
                           e.at("parity").get<std::string>() == "even" ? Parity::Even : Parity::Odd});
        }
        return out;
    }
    const std::vector<SymmetryType> syms{SymmetryType::parse("even+"), SymmetryType::parse("odd-")};
    ScanOptions so;
    so.trunc_eps = cfg.trunc_eps;
    so.threads = thread_count(cfg);
    const auto brackets = scan_many(1, syms, lo, hi, so);
    json list = json::array();
    for (std::size_t k = 0; k < syms.size(); ++k) {
        for (const auto& b : brackets[k]) {
            try {
                RefineOptions opt;
                opt.trunc_eps = cfg.trunc_eps;
                const MaassForm f = refine(1, syms[k], b, opt);
                out.push_back({f.R, f.symmetry.parity});
                list.push_back({{"R", format_real(f.R)}, {"parity", f.symmetry.parity == Parity::Even ? "even" : "odd"}});
            } catch (const LostMinimumError&) {
            }
        }
    }
    write_file(path, json{{"lo", format_real(lo)}, {"hi", format_real(hi)}, {"eigenvalues", list}}.dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------------------

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
    const auto syms = selected_symmetries(cfg);
    if (cfg.level > 1 && !is_prime(cfg.level)) throw ConfigError("level must be 1 or a prime");
    const Store store(cfg.out);
    json manifest = base_manifest(cfg, syms);
    std::vector<MaassForm> forms;

    if (cfg.r_hi > cfg.r_lo) {
        ScanOptions so;
        so.trunc_eps = cfg.trunc_eps;
        so.threads = thread_count(cfg);
        const auto brackets = scan_many(cfg.level, syms, cfg.r_lo, cfg.r_hi, so);
        struct Item {
            SymmetryType sym;
            Bracket bracket;
            std::optional<MaassForm> form;
            json failure;
            bool done = false;
        };
        std::vector<Item> items;
        for (std::size_t k = 0; k < syms.size(); ++k)
            for (const auto& b : brackets[k]) items.push_back({syms[k], b, {}, {}, false});
        parallel_for(items.size(), thread_count(cfg), [&](std::size_t i) {
            auto& it = items[i];
            try {
                it.form = refine(cfg.level, it.sym, it.bracket, refine_options(cfg, it.bracket.R));
            } catch (const Error& e) {
                it.failure = {{"symmetry", it.sym.name()},
                              {"bracket", {format_real(it.bracket.lo), format_real(it.bracket.hi)}},
                              {"kind", error_kind(e)},
                              {"message", e.what()}};
            }
            it.done = true;
        });
        for (auto& it : items) {
            if (!it.done) {
                manifest["complete"] = false;
                continue;
            }
            if (!it.form) {
                manifest["failures"].push_back(it.failure);
                continue;
            }
            // two brackets converging on one eigenvalue keep the better solve
            auto dup = std::find_if(forms.begin(), forms.end(), [&](const MaassForm& f) {
                return f.symmetry == it.form->symmetry && std::abs(f.R - it.form->R) < 1e-7;
            });
            if (dup == forms.end()) forms.push_back(*it.form);
            else if (it.form->residual < dup->residual) *dup = *it.form;
        }
        mark_oldforms(forms, cfg, cfg.r_lo, cfg.r_hi);
    }

    store.save_forms(forms);
    manifest["forms"] = forms_summary(store.load_forms());
    store.save_manifest(manifest);
    print_table(out, syms, forms);
    if (!manifest["failures"].empty()) out << manifest["failures"].size() << " brackets rejected or failed (see manifest)\n";
    if (!manifest["complete"].get<bool>()) out << "interrupted: manifest covers completed brackets only\n";
    return kOk;
}

int cmd_refine(const RunConfig& cfg, std::ostream& out) {
    const auto syms = selected_symmetries(cfg);
    if (cfg.level > 1 && !is_prime(cfg.level)) throw ConfigError("level must be 1 or a prime");
    if (!(cfg.r_hi > cfg.r_lo)) throw ConfigError("refine needs a bracket LO:HI with LO < HI");
    const Store store(cfg.out);
    json manifest;
    std::vector<MaassForm> forms;
    if (store.exists()) {
        manifest = store.load_manifest();
        if (manifest.at("level").get<std::int64_t>() != cfg.level) {
            throw ConfigError("store in " + cfg.out + " holds level " + manifest.at("level").dump());
        }
        forms = load_forms_checked(store, manifest);
        const double lo = std::min(std::strtod(manifest["R_lo"].get<std::string>().c_str(), nullptr), cfg.r_lo);
        const double hi = std::max(std::strtod(manifest["R_hi"].get<std::string>().c_str(), nullptr), cfg.r_hi);
        manifest["R_lo"] = format_real(lo);
        manifest["R_hi"] = format_real(hi);
    } else {
        manifest = base_manifest(cfg, syms);
    }

    std::vector<MaassForm> fresh;
    const Bracket b{cfg.r_lo, cfg.r_hi, 0.5 * (cfg.r_lo + cfg.r_hi), 0, 0};
    for (const auto& s : syms) fresh.push_back(refine(cfg.level, s, b, refine_options(cfg, b.R)));
    mark_oldforms(fresh, cfg, cfg.r_lo, cfg.r_hi);
    for (const auto& f : fresh) {
        std::erase_if(forms, [&](const MaassForm& g) { return g.symmetry == f.symmetry && std::abs(g.R - f.R) < 1e-6; });
        forms.push_back(f);
        out << f.symmetry.name() << " R = " << fmt("%.12f", f.R) << "  residual " << fmt("%.2e", f.residual)
            << "  M " << f.M() << "  hecke " << fmt("%.1e", hecke_check(f)) << (f.is_oldform ? "  oldform" : "") << "\n";
    }
    store.save_forms(forms);
    manifest["forms"] = forms_summary(store.load_forms());
    store.save_manifest(manifest);
    return kOk;
}

int cmd_lfun(const RunConfig& cfg, std::ostream& out) {
    const Store store(cfg.out);
    json manifest = store.load_manifest();
    const auto forms = load_forms_checked(store, manifest);

    std::vector<const MaassForm*> chosen;
    if (!cfg.ids.empty()) {
        for (const auto& id : cfg.ids) {
            auto it = std::find_if(forms.begin(), forms.end(), [&](const MaassForm& f) { return form_id(f) == id; });
            if (it == forms.end()) throw NotFoundError("no form with id " + id);
            chosen.push_back(&*it);
        }
    } else {
        std::vector<SymmetryType> syms = cfg.sym == "all" ? SymmetryType::all() : selected_symmetries(cfg);
        for (const auto& f : forms) {
            if (f.is_oldform || std::find(syms.begin(), syms.end(), f.symmetry) == syms.end()) continue;
            if (cfg.r_given && (f.R < cfg.r_lo || f.R > cfg.r_hi)) continue;
            chosen.push_back(&f);
        }
    }

    struct Result {
        std::optional<ZGrid> grid;
        json meta;
        std::string error;
    };
    std::vector<Result> results(chosen.size());
    parallel_for(chosen.size(), thread_count(cfg), [&](std::size_t i) {
        const MaassForm& f = *chosen[i];
        const std::string id = form_id(f);
        try {
            auto spec = LFunctionSpec::from_form(f);
            if (cfg.delta > 0) spec.Delta = cfg.delta;
            const double delta = spec.Delta > 0 ? spec.Delta : 1 / std::sqrt(double(f.level));
            const LFunction lf(spec);
            auto shifted_spec = spec;
            shifted_spec.Delta = 1.3 * delta;
            const LFunction shifted(shifted_spec);
            std::vector<std::uint32_t> seed_words{static_cast<std::uint32_t>(cfg.seed),
                                                  static_cast<std::uint32_t>(cfg.seed >> 32)};
            for (char c : id) seed_words.push_back(static_cast<unsigned char>(c));
            std::seed_seq seq(seed_words.begin(), seed_words.end());
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> sig(-3.4, 4.4), tt(-lf.t_window() + 0.1, lf.t_window() - 0.1);
            double fe = 0, dd = 0;
            for (int k = 0; k < 10; ++k) {
                const std::complex<double> s(sig(rng), tt(rng));
                const auto xi = lf.lambda(s);
                const double scale = std::max(1.0, std::abs(xi));
                fe = std::max(fe, std::abs(xi - double(spec.epsilon) * lf.lambda(1.0 - s)) / scale);
                dd = std::max(dd, std::abs(xi - shifted.lambda(s)) / scale);
            }
            results[i].grid = z_grid(spec, std::min(cfg.t_max, f.R), cfg.grid_step);
            results[i].meta = {{"id", id},
                               {"Delta", delta},
                               {"a", spec.a},
                               {"fe_deviation", fe},
                               {"delta_deviation", dd},
                               {"check_points", 10}};
        } catch (const Error& e) {
            results[i].error = error_kind(e) + ": " + e.what();
        }
    });

    int failed = 0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const std::string id = form_id(*chosen[i]);
        auto& r = results[i];
        if (r.grid) {
            json j = zgrid_to_json(*r.grid);
            j["meta"] = r.meta;
            write_file(store.path("zgrid_" + id + ".json"), j.dump() + "\n");
            add_unique(manifest["zgrids"], id);
            manifest["lfun_failures"].erase(id);
            out << id << "  eps " << (r.grid->epsilon > 0 ? "+1" : "-1") << "  zeros " << r.grid->zeros.size() << "  "
                << to_string(r.grid->critical_kind) << " " << fmt("%.6g", r.grid->critical_value) << "  FE dev "
                << fmt("%.1e", r.meta["fe_deviation"].get<double>()) << "  Delta dev "
                << fmt("%.1e", r.meta["delta_deviation"].get<double>()) << "\n";
        } else if (!r.error.empty()) {
            ++failed;
            manifest["lfun_failures"][id] = r.error;
            out << id << "  failed: " << r.error << "\n";
        }
    }
    if (stop_requested()) out << "interrupted: manifest covers completed forms only\n";
    store.save_manifest(manifest);
    return failed ? kPrecision : kOk;
}

int cmd_stats(const RunConfig& cfg, const std::string& which, std::ostream& out) {
    const Store store(cfg.out);
    json manifest = store.load_manifest();
    const auto forms = load_forms_checked(store, manifest);
    std::vector<MaassForm> in_range;
    for (const auto& f : forms)
        if (!cfg.r_given || (f.R >= cfg.r_lo && f.R <= cfg.r_hi)) in_range.push_back(f);
    const Spectrum spectrum =
        make_spectrum(manifest.at("level").get<std::int64_t>(),
                      cfg.r_given ? cfg.r_lo : std::strtod(manifest.at("R_lo").get<std::string>().c_str(), nullptr),
                      cfg.r_given ? cfg.r_hi : std::strtod(manifest.at("R_hi").get<std::string>().c_str(), nullptr), in_range);
    std::vector<std::pair<std::string, CsvSeries>> series;
    auto meta = [&](CsvSeries& s, const std::string& what) {
        s.meta = {{"level", std::to_string(manifest.at("level").get<std::int64_t>())}, {"statistic", what}};
    };

    if (which == "weyl") {
        auto x = spectrum.values();
        std::optional<double> removed;
        if (cfg.delete_one) {
            if (x.empty()) throw InsufficientDataError("no newforms to delete from");
            auto it = std::min_element(x.begin(), x.end(), [&](double a, double b) {
                return std::abs(a - *cfg.delete_one) < std::abs(b - *cfg.delete_one);
            });
            removed = *it;
            x.erase(it);
        }
        if (x.size() < 50) {
            throw InsufficientDataError("stats weyl needs at least 50 newforms in forms.jsonl; found " +
                                        std::to_string(x.size()) + " (scan a wider range)");
        }
        const WeylFit fit = weyl_fit(x, WeylBasis::TwoTerm, cfg.window);
        const WeylFit six = weyl_fit(x, WeylBasis::SixTerm, cfg.window);
        const auto findings = audit_missing(fit, cfg.audit_threshold);
        out << "newforms: " << x.size() << "\n";
        if (removed) out << "deleted: x = " << fmt("%.6f", *removed) << " (R = " << fmt("%.8f", std::sqrt(*removed - 0.25)) << ")\n";
        out << "two-term fit: A = " << fmt("%.6f", fit.coefficients[0]) << "  B = " << fmt("%.6f", fit.coefficients[1])
            << "  (main term 10/12 = 0.833333 for level 11)\n";
        out << "six-term fit:";
        for (double c : six.coefficients) out << " " << fmt("%.6g", c);
        out << (six.ill_conditioned ? "  (ill-conditioned)" : "") << "  condition " << fmt("%.2e", six.condition) << "\n";
        out << "window: " << fit.window << " entries; audit threshold " << cfg.audit_threshold << "\n";
        json audit = {{"status", findings.empty() ? "clean" : "findings"}, {"findings", json::array()}};
        if (removed) audit["deleted"] = format_real(*removed);
        for (const auto& f : findings) {
            out << "audit: " << (f.missing ? "missing" : "spurious") << " value near x = " << fmt("%.3f", f.x)
                << " (R = " << fmt("%.4f", std::sqrt(std::max(f.x - 0.25, 0.0))) << "), shift " << fmt("%.3f", f.shift) << "\n";
            audit["findings"].push_back({{"x", f.x}, {"shift", f.shift}, {"missing", f.missing}});
        }
        if (findings.empty()) out << "audit: no persistent shift (gaps within one window of either end are not detectable)\n";
        manifest["audit"] = audit;
        CsvSeries r, w;
        r.columns = {"x", "r"};
        for (std::size_t i = 0; i < x.size(); ++i) r.rows.push_back({x[i], fit.r[i]});
        w.columns = {"x", "mean_r"};
        for (const auto& [cx, m] : fit.window_avg) w.rows.push_back({cx, m});
        meta(r, "weyl remainder");
        meta(w, "weyl moving average");
        r.meta.push_back({"A", format_real(fit.coefficients[0])});
        r.meta.push_back({"B", format_real(fit.coefficients[1])});
        series.push_back({"series_weyl_remainder.csv", r});
        series.push_back({"series_weyl_window.csv", w});
    } else if (which == "spacing") {
        auto poisson = [](double s) { return s <= 0 ? 0.0 : 1 - std::exp(-s); };
        const auto pooled = nn_spacings(spectrum, false).front();
        const double d = ks_statistic(pooled, poisson);
        out << "pooled: " << pooled.size() << " spacings, mean " << fmt("%.4f", mean(pooled)) << ", KS vs Poisson "
            << fmt("%.4f", d) << " (5% critical " << fmt("%.4f", ks_critical(pooled.size())) << ")\n";
        CsvSeries s = cdf_series(pooled, {"poisson_cdf"}, {poisson});
        meta(s, "pooled unfolded spacing");
        series.push_back({"series_spacing.csv", s});
        for (const auto& sym : SymmetryType::all()) {
            const auto x = spectrum.values(&sym);
            if (x.size() < 30) {
                out << sym.name() << ": " << x.size() << " newforms, below 30, skipped\n";
                continue;
            }
            Spectrum one = spectrum;
            std::erase_if(one.entries, [&](const SpectrumEntry& e) { return !(e.symmetry == sym); });
            const auto sp = nn_spacings(one, true).front();
            const double dc = ks_statistic(sp, poisson);
            out << sym.name() << ": " << sp.size() << " spacings, mean " << fmt("%.4f", mean(sp)) << ", KS "
                << fmt("%.4f", dc) << (dc < ks_critical(sp.size()) ? " pass" : " FAIL") << " at 5%\n";
            CsvSeries c = cdf_series(sp, {"poisson_cdf"}, {poisson});
            meta(c, "unfolded spacing " + sym.name());
            series.push_back({"series_spacing_" + class_code(sym) + ".csv", c});
        }
    } else if (which == "oldforms") {
        std::vector<double> pos;
        int outside = 0;
        for (Parity par : {Parity::Even, Parity::Odd}) {
            std::vector<double> olds, news;
            for (const auto& e : spectrum.entries) {
                if (e.symmetry.parity != par) continue;
                (e.is_oldform ? olds : news).push_back(e.lambda());
            }
            std::sort(olds.begin(), olds.end());
            std::sort(news.begin(), news.end());
            for (double o : olds) {
                try {
                    pos.push_back(oldform_positions({o}, news).front());
                } catch (const BoundaryError&) {
                    ++outside;
                }
            }
        }
        if (pos.empty()) throw InsufficientDataError("no oldform lies between two newforms of its parity; scan a wider range");
        const double d = ks_statistic(pos, [](double v) { return std::clamp(v, 0.0, 1.0); });
        out << "oldforms placed: " << pos.size() << " (outside the newform range: " << outside << ")\n";
        out << "KS vs uniform: " << fmt("%.4f", d) << " (5% critical " << fmt("%.4f", ks_critical(pos.size())) << ")\n";
        CsvSeries s = cdf_series(pos, {"uniform_cdf"}, {[](double v) { return v; }});
        meta(s, "oldform position between neighbouring newforms of the same parity");
        series.push_back({"series_oldforms.csv", s});
    } else if (which == "firstzero" || which == "critvals" || which == "zerospacing") {
        const auto grids = store.load_zgrids();
        if (grids.empty()) throw InsufficientDataError("no zgrid files in the store; run lfun first");
        if (which == "firstzero") {
            const auto ref_p = rmt_reference(Ensemble::OPlus, cfg.rmt_dim, cfg.rmt_samples, cfg.seed, thread_count(cfg));
            const auto ref_m = rmt_reference(Ensemble::OMinus, cfg.rmt_dim + 1, cfg.rmt_samples, cfg.seed + 1, thread_count(cfg));
            const auto st = first_zero_stats(grids, cfg.firstzero_r_min, mean(ref_p), mean(ref_m));
            out << "forms with R >= " << cfg.firstzero_r_min << ": " << st.plus.size() << " with epsilon = +1, "
                << st.minus.size() << " with epsilon = -1\n";
            for (int sign : {1, -1}) {
                const auto& v = sign > 0 ? st.plus : st.minus;
                const auto& ref = sign > 0 ? ref_p : ref_m;
                if (v.empty()) continue;
                const double d = ks_two_sample(v, ref);
                out << (sign > 0 ? "plus" : "minus") << ": scale " << fmt("%.4f", sign > 0 ? st.scale_plus : st.scale_minus)
                    << ", KS vs SO(" << (sign > 0 ? "even" : "odd") << ") " << fmt("%.4f", d) << " (5% critical "
                    << fmt("%.4f", ks_critical_two_sample(v.size(), ref.size())) << ")\n";
                CsvSeries s = cdf_series(v, {"reference_cdf"}, {empirical(ref)});
                meta(s, sign > 0 ? "rescaled first zero, epsilon +1" : "rescaled first zero, epsilon -1");
                series.push_back({sign > 0 ? "series_firstzero_plus.csv" : "series_firstzero_minus.csv", s});
            }
        } else if (which == "critvals") {
            const auto values = plus_critical_values(grids, cfg.critval_skip);
            const auto c = critical_value_cdf(values);
            out << "critical values: " << values.size() << " (first " << cfg.critval_skip << " per type skipped)\n";
            out << "fit: CDF ~ " << fmt("%.4f", c.c_prime) << " sqrt(x) on x <= " << fmt("%.4g", c.x_cut) << "\n";
            CsvSeries s = cdf_series(values, {"fit"}, {[cp = c.c_prime](double x) { return cp * std::sqrt(std::max(x, 0.0)); }});
            meta(s, "critical values L(1/2), epsilon +1");
            s.meta.push_back({"c_prime", format_real(c.c_prime)});
            series.push_back({"series_critvals.csv", s});
        } else {
            const auto gaps = zero_spacing_stats(grids, cfg.zerospacing_r_min, cfg.zero_start, cfg.t_max);
            if (gaps.empty()) throw InsufficientDataError("no zero gaps from forms with R > " + format_real(cfg.zerospacing_r_min));
            const auto ref = rmt_reference(Ensemble::Unitary, cfg.rmt_dim, cfg.rmt_samples, cfg.seed, thread_count(cfg));
            const double d = ks_two_sample(gaps, ref);
            out << "gaps: " << gaps.size() << ", mean " << fmt("%.4f", mean(gaps)) << ", KS vs U(" << cfg.rmt_dim << ") "
                << fmt("%.4f", d) << " (5% critical " << fmt("%.4f", ks_critical_two_sample(gaps.size(), ref.size())) << ")\n";
            CsvSeries s = cdf_series(gaps, {"reference_cdf"}, {empirical(ref)});
            meta(s, "unfolded zero spacing");
            series.push_back({"series_zerospacing.csv", s});
        }
    } else {
        throw ConfigError("unknown statistic '" + which + "'; use weyl, spacing, oldforms, firstzero, critvals or zerospacing");
    }

    for (const auto& [name, s] : series) {
        write_csv(store.path(name), s);
        add_unique(manifest["series"], name);
        out << "wrote " << name << "\n";
    }
    store.save_manifest(manifest);
    return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    const Store store(cfg.out);
    const json manifest = store.load_manifest();
    const auto forms = load_forms_checked(store, manifest);
    bool ok = true;

    if (manifest.value("hash", "") != manifest_hash(manifest)) {
        out << "store: manifest hash mismatch\n";
        ok = false;
    }
    const json records = manifest.value("records", json::object());
    for (const auto& [name, sha] : records.items()) {
        if (!std::filesystem::exists(store.path(name)) || sha256_hex(read_file(store.path(name))) != sha.get<std::string>()) {
            out << "store: " << name << " does not match its recorded hash\n";
            ok = false;
        }
    }

    struct Row {
        double hecke = 0, reality = 0, ramanujan = 0, fricke = 0, dip = 0;
    };
    std::vector<Row> rows(forms.size());
    parallel_for(forms.size(), thread_count(cfg), [&](std::size_t i) {
        const MaassForm& f = forms[i];
        Row& r = rows[i];
        r.hecke = hecke_check(f);
        r.reality = reality_check(f);
        r.ramanujan = ramanujan_check(f);
        std::mt19937_64 rng(cfg.seed + i);
        std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(f.config.y0, f.config.y0 + 0.5);
        for (int tested = 0, tries = 0; tested < 20 && tries < 2000; ++tries) {
            const HPoint z{ux(rng), uy(rng)};
            const HPoint w = pullback(fricke(z, f.level), f.level).point;
            if (w.y < f.config.y0) continue;
            ++tested;
            r.fricke = std::max(r.fricke, std::abs(evaluate(f, z) - f.symmetry.eta() * evaluate(f, w)));
        }
        r.dip = dip_contrast(f);
    });

    Row worst{0, 0, 0, 0, 1e300};
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-26s %9s %9s %9s %9s %9s  %s\n", "form", "hecke", "imag", "max|a_p|", "fricke", "dip",
                  "result");
    out << buf;
    int failed = 0;
    for (std::size_t i = 0; i < forms.size(); ++i) {
        const Row& r = rows[i];
        const double fricke_tol = 100 * forms[i].trunc_eps;
        const bool pass = r.hecke < 1e-6 && r.reality < 1e-7 && r.ramanujan < 2 && r.fricke < fricke_tol && r.dip >= 1e4;
        failed += !pass;
        worst.hecke = std::max(worst.hecke, r.hecke);
        worst.reality = std::max(worst.reality, r.reality);
        worst.ramanujan = std::max(worst.ramanujan, r.ramanujan);
        worst.fricke = std::max(worst.fricke, r.fricke);
        worst.dip = std::min(worst.dip, r.dip);
        std::snprintf(buf, sizeof buf, "%-26s %9.1e %9.1e %9.4f %9.1e %9.1e  %s\n", form_id(forms[i]).c_str(), r.hecke,
                      r.reality, r.ramanujan, r.fricke, r.dip, pass ? "pass" : "FAIL");
        out << buf;
    }
    if (!forms.empty()) {
        std::snprintf(buf, sizeof buf, "%-26s %9.1e %9.1e %9.4f %9.1e %9.1e\n", "worst", worst.hecke, worst.reality,
                      worst.ramanujan, worst.fricke, worst.dip);
        out << buf;
    }
    out << "limits: hecke < 1e-6, imag < 1e-7, |a_p| < 2, fricke < 100 trunc_eps, dip >= 1e4\n";
    out << forms.size() - failed << " of " << forms.size() << " forms pass\n";
    return ok && failed == 0 ? kOk : kValidation;
}

}  // namespace maass::cli
