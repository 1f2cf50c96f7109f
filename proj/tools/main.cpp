// convflow: contrast-invariant optical flow with convective regularization.
//
// Subcommands:
//   estimate   frames dir -> per-frame .flo files + trace + manifest
//   trace      like estimate, but prints the iteration trace to stdout only
//   synth      named synthetic scenario -> frames + ground-truth flow
//   evaluate   estimated flow vs ground-truth flow -> error statistics
//   colorize   flow files -> color-coded PNG frames

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "convflow/colorize.hpp"
#include "convflow/flo_io.hpp"
#include "convflow/image_io.hpp"
#include "convflow/metrics.hpp"
#include "convflow/pipeline.hpp"
#include "convflow/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace convflow;

namespace {

struct EstimateOptions {
    std::string frames_dir;
    std::string out_dir;
    std::string preset;
    double alpha = 5e-3;
    double beta = 5e-4;
    double beta0 = -1.0;
    double eps = 0.01;
    int dt_factor = 8;
    int max_iters = 8;
    double tol = 1e-3;
    int window = 30;
    int offset = 0;
    int threads = 0;
    int quadrature = 2;
    bool unweighted = false;
    bool colorize_out = false;
};

void add_estimate_flags(CLI::App* cmd, EstimateOptions& o, bool with_out) {
    cmd->add_option("frames", o.frames_dir, "Directory of PGM/PNG frames")->required();
    if (with_out)
        cmd->add_option("--out", o.out_dir, "Output directory for flow files")->required();
    auto* alpha = cmd->add_option("--alpha", o.alpha, "Convective weight alpha_1");
    auto* beta = cmd->add_option("--beta", o.beta, "Isotropic weight beta_1");
    auto* preset =
        cmd->add_option("--preset", o.preset, "Parameter preset: traffic or passat")
            ->check(CLI::IsMember({"traffic", "passat"}));
    preset->excludes(alpha)->excludes(beta);
    cmd->add_option("--beta0", o.beta0, "Initialization weight (default: alpha)");
    cmd->add_option("--eps", o.eps, "Contrast-weight floor epsilon")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dt-factor", o.dt_factor, "Time steps per frame spacing")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", o.max_iters, "Outer iteration cap");
    cmd->add_option("--tol", o.tol, "Relative step-norm stabilization tolerance");
    cmd->add_option("--window", o.window, "Frame window length (<=0: all)");
    cmd->add_option("--offset", o.offset, "Frame window offset");
    cmd->add_option("--threads", o.threads, "OpenMP threads (0: library default)");
    cmd->add_option("--quadrature", o.quadrature, "Gauss points per axis")
        ->check(CLI::IsMember({2, 3}));
    cmd->add_flag("--unweighted", o.unweighted, "Use lambda = 1 (no contrast weighting)");
    if (with_out)
        cmd->add_flag("--colorize", o.colorize_out, "Also write color-coded PNG frames");
}

FlowParams to_params(const EstimateOptions& o) {
    FlowParams p;
    p.alpha1 = o.alpha;
    p.beta1 = o.beta;
    if (o.preset == "traffic") {
        p.alpha1 = 5e-3;
        p.beta1 = 5e-4;
    } else if (o.preset == "passat") {
        p.alpha1 = 1e-3;
        p.beta1 = 5e-5;
    }
    p.beta0 = o.beta0;
    p.epsilon = o.eps;
    p.weighted = !o.unweighted;
    p.max_outer_iterations = o.max_iters;
    p.stabilization_tol = o.tol;
    p.quadrature_order = o.quadrature;
    return p;
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

void print_trace(std::ostream& os, const IterationTrace& trace) {
    os << "# k data convective isotropic total step_norm cg_iters\n";
    char line[256];
    for (const auto& r : trace.records) {
        const auto& e = r.energy_at_iterate;
        std::snprintf(line, sizeof(line), "%d %.12e %.12e %.12e %.12e %.12e %zu\n", r.k,
                      e.data, e.convective, e.isotropic, e.total, r.step_norm,
                      static_cast<std::size_t>(r.solve.iterations));
        os << line;
    }
}

json params_json(const FlowParams& p, double dt) {
    return json{{"alpha", p.alpha1},
                {"beta", p.beta1},
                {"beta0", p.init_beta()},
                {"eps", p.epsilon},
                {"weighted", p.weighted},
                {"dt", dt},
                {"max_iters", p.max_outer_iterations},
                {"tol", p.stabilization_tol},
                {"quadrature", p.quadrature_order}};
}

int run_estimate(const EstimateOptions& o, bool trace_only) {
    set_threads(o.threads);
    double dt = 1.0 / o.dt_factor;
    ImageSequence f = load_sequence(o.frames_dir, dt, o.offset, o.window);
    FlowParams params = to_params(o);
    auto [u, trace] = convective_iterate(f, params);
    if (trace_only) {
        print_trace(std::cout, trace);
        return 0;
    }
    fs::create_directories(o.out_dir);
    // flow on disk is in pixels per frame
    VectorField u_frame = scaled(u, dt);
    auto paths = write_flow(u_frame, o.out_dir);
    {
        std::ofstream os(o.out_dir + "/trace.txt");
        print_trace(os, trace);
    }
    if (o.colorize_out) {
        double umax = flow_magnitude_percentile(u_frame);
        for (int k = 0; k < f.grid.frames; ++k) {
            auto rgb = colorize_frame(u_frame, k, umax);
            char name[32];
            std::snprintf(name, sizeof(name), "flow_%04d.png", k);
            write_png_rgb(o.out_dir + "/" + name, f.grid.width, f.grid.height, rgb);
        }
    }
    json manifest = {{"frames", o.frames_dir},
                     {"window_offset", o.offset},
                     {"window_length", f.grid.frames},
                     {"grid", {{"frames", f.grid.frames},
                               {"height", f.grid.height},
                               {"width", f.grid.width}}},
                     {"params", params_json(params, dt)},
                     {"stabilized", trace.stabilized},
                     {"outer_iterations", trace.records.size()},
                     {"flow_files", paths}};
    std::ofstream(o.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
    std::cout << "wrote " << paths.size() << " flow frames to " << o.out_dir << "\n";
    return 0;
}

int run_synth(const std::string& name, const std::string& out_dir, int dt_factor,
              unsigned seed) {
    double dt = 1.0 / dt_factor;
    GroundTruthPair gt = scenario(name, dt, seed);
    const SpaceTimeGrid& g = gt.sequence.grid;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/gt");
    for (int k = 0; k < g.frames; ++k) {
        char fname[32];
        std::snprintf(fname, sizeof(fname), "frame_%04d.pgm", k);
        write_pgm(out_dir + "/" + fname, frame_to_image(gt.sequence, k));
    }
    auto flow_paths = write_flow(gt.flow_px_per_frame, out_dir + "/gt");
    json manifest = {{"scenario", name},
                     {"seed", seed},
                     {"dt", dt},
                     {"grid", {{"frames", g.frames},
                               {"height", g.height},
                               {"width", g.width}}},
                     {"flow_units", "pixels_per_frame"},
                     {"gt_flow_files", flow_paths}};
    std::ofstream(out_dir + "/manifest.json") << manifest.dump(2) << "\n";
    std::cout << "wrote scenario '" << name << "' (" << g.frames << " frames) to "
              << out_dir << "\n";
    return 0;
}

std::vector<std::string> flo_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".flo")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .flo files in " + dir);
    return files;
}

int run_evaluate(const std::string& flow_dir, const std::string& truth_dir,
                 const std::string& stats_out) {
    VectorField u = read_flow(flo_files(flow_dir));
    VectorField t = read_flow(flo_files(truth_dir));
    int frames = std::min(u.grid.frames, t.grid.frames);
    if (u.grid.height != t.grid.height || u.grid.width != t.grid.width)
        throw std::runtime_error("evaluate: flow and truth dimensions differ");
    // compare over the common frame range
    SpaceTimeGrid g(frames, u.grid.height, u.grid.width, u.grid.dt);
    VectorField uc(g), tc(g);
    std::copy_n(u.u1.begin(), g.nodes(), uc.u1.begin());
    std::copy_n(u.u2.begin(), g.nodes(), uc.u2.begin());
    std::copy_n(t.u1.begin(), g.nodes(), tc.u1.begin());
    std::copy_n(t.u2.begin(), g.nodes(), tc.u2.begin());
    ErrorStats s = endpoint_error(uc, tc);
    json out = {{"frames", frames},
                {"mean_endpoint", s.mean_endpoint},
                {"max_endpoint", s.max_endpoint},
                {"mean_angular_deg", s.mean_angular_deg},
                {"count", s.count}};
    std::cout << out.dump(2) << "\n";
    if (!stats_out.empty()) std::ofstream(stats_out) << out.dump(2) << "\n";
    return 0;
}

int run_colorize(const std::string& flow_dir, const std::string& out_dir, double umax) {
    VectorField u = read_flow(flo_files(flow_dir));
    if (umax <= 0.0) umax = flow_magnitude_percentile(u);
    fs::create_directories(out_dir);
    for (int k = 0; k < u.grid.frames; ++k) {
        auto rgb = colorize_frame(u, k, umax);
        char name[32];
        std::snprintf(name, sizeof(name), "flow_%04d.png", k);
        write_png_rgb(out_dir + "/" + name, u.grid.width, u.grid.height, rgb);
    }
    std::cout << "wrote " << u.grid.frames << " color frames to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrast-invariant optical flow with convective regularization"};
    app.require_subcommand(1);

    EstimateOptions est, trc;
    auto* cmd_estimate = app.add_subcommand("estimate", "Estimate flow from frames");
    add_estimate_flags(cmd_estimate, est, true);
    auto* cmd_trace =
        app.add_subcommand("trace", "Run the estimator and print the iteration trace");
    add_estimate_flags(cmd_trace, trc, false);

    std::string synth_name, synth_out;
    int synth_dt_factor = 8;
    unsigned synth_seed = 1234;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic scenario");
    cmd_synth->add_option("name", synth_name, "Scenario name")->required();
    cmd_synth->add_option("--out", synth_out, "Output directory")->required();
    cmd_synth->add_option("--dt-factor", synth_dt_factor, "Time steps per frame spacing")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--seed", synth_seed, "Texture seed");

    std::string eval_flow, eval_truth, eval_stats;
    auto* cmd_eval = app.add_subcommand("evaluate", "Compare flow against ground truth");
    cmd_eval->add_option("flow", eval_flow, "Directory of estimated .flo files")->required();
    cmd_eval->add_option("truth", eval_truth, "Directory of ground-truth .flo files")
        ->required();
    cmd_eval->add_option("--out", eval_stats, "Optional stats file (JSON)");

    std::string col_flow, col_out;
    double col_umax = 0.0;
    auto* cmd_color = app.add_subcommand("colorize", "Render flow files as PNG");
    cmd_color->add_option("flow", col_flow, "Directory of .flo files")->required();
    cmd_color->add_option("--out", col_out, "Output directory")->required();
    cmd_color->add_option("--umax", col_umax, "Saturation magnitude (default: 99th pct)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_estimate->parsed()) return run_estimate(est, false);
        if (cmd_trace->parsed()) return run_estimate(trc, true);
        if (cmd_synth->parsed())
            return run_synth(synth_name, synth_out, synth_dt_factor, synth_seed);
        if (cmd_eval->parsed()) return run_evaluate(eval_flow, eval_truth, eval_stats);
        if (cmd_color->parsed()) return run_colorize(col_flow, col_out, col_umax);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
