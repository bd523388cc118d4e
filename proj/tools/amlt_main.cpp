#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "amlt/engine.hpp"
#include "amlt/errors.hpp"
#include "amlt/kernel_plan.hpp"
#include "amlt/presets.hpp"
#include "amlt/schedule.hpp"

using json = nlohmann::ordered_json;
using namespace amlt;

namespace {

struct CliConfig {
    std::string task_path;
    std::string preset;
    std::vector<std::int64_t> dims{512, 512, 512};
    std::string layout_a = "row";
    std::string layout_b = "row";
    std::uint64_t seed = 1;
    std::string data = "int";
    bool packing = false;
    int simd_width = 8;
    int registers = 32;
    std::string mode = "adaptive";
    std::int64_t kc = 0;
    std::int64_t nc = 0;
    bool verify = false;
    std::string format = "table";
    int trials = 3;
    std::string agg = "min";
    std::string a_file;
    std::string b_file;
    std::string out;
};

void add_task_options(CLI::App* sub, CliConfig& cfg) {
    sub->add_option("--task", cfg.task_path, "Path to a task source file");
    sub->add_option("--preset", cfg.preset,
                    "Built-in task (matmul, q1, q2, q3 with -tc/-ti/-tj/-tij and "
                    "-ab/-atb/-abt/-atbt suffixes)");
    sub->add_option("--simd-width", cfg.simd_width, "Doubles per vector register")
        ->check(CLI::IsMember({1, 2, 4, 8, 16}));
    sub->add_option("--registers", cfg.registers, "Vector register budget")
        ->check(CLI::PositiveNumber);
}

void add_data_options(CLI::App* sub, CliConfig& cfg) {
    sub->add_option("--dims", cfg.dims, "Dimensions M K N")
        ->expected(3)
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--layout-a", cfg.layout_a, "Storage order of the A operand")
        ->check(CLI::IsMember({"row", "col"}));
    sub->add_option("--layout-b", cfg.layout_b, "Storage order of the B operand")
        ->check(CLI::IsMember({"row", "col"}));
    sub->add_option("--seed", cfg.seed, "Data generation seed");
    sub->add_option("--data", cfg.data, "Generated data: int (in [-8,8]) or real (in [0,1))")
        ->check(CLI::IsMember({"int", "real"}));
    sub->add_flag("--packing", cfg.packing, "Pack operand panels before the kernel loops");
    sub->add_option("--a-file", cfg.a_file, "Load the A operand from a binary matrix file");
    sub->add_option("--b-file", cfg.b_file, "Load the B operand from a binary matrix file");
    sub->add_option("--out", cfg.out, "Write the report to a file instead of stdout");
}

std::string load_source(const CliConfig& cfg) {
    if (!cfg.task_path.empty() && !cfg.preset.empty())
        throw EngineError("--task and --preset are mutually exclusive");
    if (!cfg.task_path.empty()) {
        std::ifstream in(cfg.task_path, std::ios::binary);
        if (!in) throw EngineError("cannot open task file: " + cfg.task_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    if (!cfg.preset.empty()) {
        auto src = preset_source(cfg.preset);
        if (!src) throw EngineError("unknown preset: " + cfg.preset);
        return *src;
    }
    throw EngineError("one of --task or --preset is required");
}

std::string task_id(const CliConfig& cfg) {
    return cfg.preset.empty() ? cfg.task_path : cfg.preset;
}

MachineModel make_machine(const CliConfig& cfg) {
    MachineModel m;
    m.simd_width = cfg.simd_width;
    m.vec_regs = cfg.registers;
    return m;
}

StorageOrder to_order(const std::string& s) {
    return s == "col" ? StorageOrder::ColMajor : StorageOrder::RowMajor;
}

DataMode to_mode(const std::string& s) {
    return s == "real" ? DataMode::Real : DataMode::IntValued;
}

void load_operand_file(TaskData& data, const std::string& name, const std::string& path) {
    auto it = data.arrays.find(name);
    if (it == data.arrays.end()) throw EngineError("task has no operand named " + name);
    MatrixBuffer loaded = read_matrix_file(path);
    if (loaded.rows() != it->second.rows() || loaded.cols() != it->second.cols())
        throw EngineError("operand file " + path + " is " + std::to_string(loaded.rows()) + "x" +
                          std::to_string(loaded.cols()) + ", task needs " +
                          std::to_string(it->second.rows()) + "x" +
                          std::to_string(it->second.cols()));
    it->second = std::move(loaded);
}

void load_operand_files(const CompiledTask& ct, const CliConfig& cfg, TaskData& data) {
    std::string a_name = ct.mmlt ? ct.recog.a : "A";
    std::string b_name = ct.mmlt ? ct.recog.b : "B";
    if (!cfg.a_file.empty()) load_operand_file(data, a_name, cfg.a_file);
    if (!cfg.b_file.empty()) load_operand_file(data, b_name, cfg.b_file);
}

double aggregate(const std::vector<double>& times, const std::string& agg) {
    if (agg == "mean")
        return std::accumulate(times.begin(), times.end(), 0.0) /
               static_cast<double>(times.size());
    return *std::min_element(times.begin(), times.end());
}

void emit(const CliConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw EngineError("cannot write output file: " + cfg.out);
    out << text;
}

// Work extents for the rate: actual loop ranges when recognized, the CLI
// triple otherwise.
void work_extents(const CompiledTask& ct, const DimBinding& bind, const CliConfig& cfg,
                  std::int64_t& M, std::int64_t& K, std::int64_t& N) {
    if (ct.mmlt) {
        M = bind.bounds.i1 - bind.bounds.i0;
        K = bind.bounds.k1 - bind.bounds.k0;
        N = bind.bounds.j1 - bind.bounds.j0;
    } else {
        M = cfg.dims[0];
        K = cfg.dims[1];
        N = cfg.dims[2];
    }
}

int cmd_run(const CliConfig& cfg) {
    if (cfg.mode == "fixed" && (cfg.kc < 1 || cfg.nc < 1)) {
        std::cerr << "usage error: --mode fixed requires --kc and --nc >= 1\n";
        return 2;
    }
    CompiledTask ct = compile_task(load_source(cfg), make_machine(cfg));
    DimBinding bind = bind_dims(ct, cfg.dims[0], cfg.dims[1], cfg.dims[2]);
    TaskData data = make_task_data(ct, bind, cfg.seed, to_order(cfg.layout_a),
                                   to_order(cfg.layout_b), to_mode(cfg.data));
    load_operand_files(ct, cfg, data);

    std::string mode = cfg.mode;
    if (!ct.mmlt && mode != "naive") {
        std::cerr << "note: task is not multiply-accumulate ("
                  << describe(Recognition{ct.why_not}) << "); running naive fallback\n";
        mode = "naive";
    }

    SteadyClock clock;
    TuneReport rep;
    std::vector<double> times;
    int trials = std::max(1, cfg.trials);
    for (int t = 0; t < trials; ++t) {
        data.result().fill(0.0);
        if (mode == "adaptive") {
            rep = run_adaptive(ct, data, bind, cfg.packing, clock);
            times.push_back(rep.total_seconds);
        } else if (mode == "fixed") {
            times.push_back(run_fixed(ct, data, bind, cfg.kc, cfg.nc, cfg.packing, clock));
        } else {
            times.push_back(run_naive_task(ct, data, bind));
        }
    }
    double elapsed = aggregate(times, cfg.agg);

    std::string verify_status = "skipped";
    bool verify_failed = false;
    if (cfg.verify) {
        VerifyResult v = verify_against_naive(ct, data, bind, to_mode(cfg.data));
        verify_status = v.exact ? "exact" : v.pass ? "pass" : "fail";
        verify_failed = !v.pass;
    }

    std::int64_t M, K, N;
    work_extents(ct, bind, cfg, M, K, N);
    bool have_rate = elapsed > 0.0;
    double rate = have_rate ? spr(M, K, N, elapsed) : 0.0;
    bool have_kc = mode != "naive";
    std::int64_t kc = mode == "adaptive" ? rep.best_kc : cfg.kc;
    std::int64_t nc = mode == "adaptive" ? rep.best_nc : cfg.nc;

    std::ostringstream os;
    if (cfg.format == "json") {
        json j;
        j["task"] = task_id(cfg);
        j["m"] = M;
        j["k"] = K;
        j["n"] = N;
        j["mode"] = mode;
        j["elapsed_seconds"] = elapsed;
        j["spr"] = have_rate ? json(rate) : json(nullptr);
        j["kc"] = have_kc ? json(kc) : json(nullptr);
        j["nc"] = have_kc ? json(nc) : json(nullptr);
        j["packing"] = cfg.packing;
        j["trials"] = trials;
        j["agg"] = cfg.agg;
        j["verify"] = verify_status;
        os << j.dump(2) << "\n";
    } else if (cfg.format == "csv") {
        os << "task,m,k,n,mode,elapsed_seconds,spr,kc,nc,packing,verify\n";
        os << task_id(cfg) << "," << M << "," << K << "," << N << "," << mode << "," << elapsed
           << ",";
        if (have_rate) os << rate;
        os << ",";
        if (have_kc) os << kc;
        os << ",";
        if (have_kc) os << nc;
        os << "," << (cfg.packing ? 1 : 0) << "," << verify_status << "\n";
    } else {
        os << "task      " << task_id(cfg) << "\n";
        os << "dims      " << M << " x " << K << " x " << N << "\n";
        os << "mode      " << mode << "\n";
        os << "elapsed   " << elapsed << " s (" << cfg.agg << " of " << trials << ")\n";
        os << "spr       ";
        if (have_rate)
            os << rate << "\n";
        else
            os << "-\n";
        if (have_kc) os << "kc, nc    " << kc << ", " << nc << "\n";
        os << "verify    " << verify_status << "\n";
    }
    emit(cfg, os.str());

    if (verify_failed) {
        std::cerr << "verification failed\n";
        return 4;
    }
    return 0;
}

int cmd_tune(const CliConfig& cfg) {
    CompiledTask ct = compile_task(load_source(cfg), make_machine(cfg));
    if (!ct.mmlt) {
        std::cerr << "recognition failed: " << describe(Recognition{ct.why_not}) << "\n";
        return 3;
    }
    DimBinding bind = bind_dims(ct, cfg.dims[0], cfg.dims[1], cfg.dims[2]);
    TaskData data = make_task_data(ct, bind, cfg.seed, to_order(cfg.layout_a),
                                   to_order(cfg.layout_b), to_mode(cfg.data));
    load_operand_files(ct, cfg, data);

    SteadyClock clock;
    TuneReport rep = run_adaptive(ct, data, bind, cfg.packing, clock);

    json j;
    j["task"] = task_id(cfg);
    j["tuned"] = rep.tuned;
    j["kc_trials"] = json::array();
    for (const auto& t : rep.kc_trials)
        j["kc_trials"].push_back({{"kc", t.value}, {"elapsed", t.elapsed}, {"score", t.score}});
    j["nc_trials"] = json::array();
    for (const auto& t : rep.nc_trials)
        j["nc_trials"].push_back({{"nc", t.value}, {"elapsed", t.elapsed}, {"score", t.score}});
    j["chosen"] = {{"kc", rep.best_kc}, {"nc", rep.best_nc}};
    j["tuning_fraction"] = rep.tuning_fraction;
    j["total_seconds"] = rep.total_seconds;
    j["coverage"] = json::array();
    for (const auto& r : rep.coverage)
        j["coverage"].push_back({{"k0", r.k0}, {"k1", r.k1}, {"j0", r.j0}, {"j1", r.j1}});
    emit(cfg, j.dump(2) + "\n");
    return 0;
}

int cmd_bench(const CliConfig& cfg) {
    CompiledTask ct = compile_task(load_source(cfg), make_machine(cfg));
    if (!ct.mmlt) {
        std::cerr << "recognition failed: " << describe(Recognition{ct.why_not}) << "\n";
        return 3;
    }
    DimBinding bind = bind_dims(ct, cfg.dims[0], cfg.dims[1], cfg.dims[2]);
    TaskData data = make_task_data(ct, bind, cfg.seed, to_order(cfg.layout_a),
                                   to_order(cfg.layout_b), to_mode(cfg.data));
    load_operand_files(ct, cfg, data);

    std::int64_t K = bind.bounds.k1 - bind.bounds.k0;
    std::int64_t N = bind.bounds.j1 - bind.bounds.j0;
    auto grid_values = [](std::int64_t limit) {
        std::vector<std::int64_t> v;
        if (limit < 16) {
            v.push_back(limit);
            return v;
        }
        for (std::int64_t x = 16; x <= limit; x *= 2) v.push_back(x);
        return v;
    };
    std::vector<std::int64_t> kcs = grid_values(K);
    std::vector<std::int64_t> ncs = grid_values(N);

    SteadyClock clock;
    int trials = std::max(1, cfg.trials);
    std::ostringstream os;
    os << "kc\\nc";
    for (std::int64_t nc : ncs) os << "," << nc;
    os << "\n";
    for (std::int64_t kc : kcs) {
        os << kc;
        for (std::int64_t nc : ncs) {
            std::vector<double> times;
            for (int t = 0; t < trials; ++t) {
                data.result().fill(0.0);
                times.push_back(run_fixed(ct, data, bind, kc, nc, cfg.packing, clock));
            }
            os << "," << aggregate(times, cfg.agg);
        }
        os << "\n";
    }
    data.result().fill(0.0);
    TuneReport rep = run_adaptive(ct, data, bind, cfg.packing, clock);
    os << "adaptive," << rep.total_seconds << ",kc=" << rep.best_kc << ",nc=" << rep.best_nc
       << "\n";
    emit(cfg, os.str());
    return 0;
}

int cmd_explain(const CliConfig& cfg) {
    CompiledTask ct = compile_task(load_source(cfg), make_machine(cfg));
    std::ostringstream os;
    os << "task:\n" << print_task(ct.task) << "\n";
    os << "recognition: " << describe(ct.mmlt ? Recognition{ct.recog} : Recognition{ct.why_not})
       << "\n";
    if (!ct.mmlt) {
        emit(cfg, os.str());
        std::cerr << "recognition failed: " << describe(Recognition{ct.why_not}) << "\n";
        return 3;
    }
    os << "\nexpression dag:\n" << dump_dag(ct.dag);
    os << "\npseudo program (" << ct.plan.program.instrs.size() << " instructions, "
       << ct.plan.program.n_extra_vec_regs << " vector temps, " << ct.plan.program.n_mask_regs
       << " mask temps):\n"
       << print_program(ct.plan.program);
    os << "\nkernel shape: " << ct.plan.shape.i_h << " x " << ct.plan.shape.i_w << "\n";
    os << print_ledger(ct.plan.ledger, ct.plan.shape, ct.plan.simd_width);
    os << "\nleaf loads:\n";
    for (const auto& l : ct.plan.leaf_loads) {
        os << "  " << l.name << " (" << leaf_role_name(l.role) << "): ";
        switch (l.strategy) {
            case LoadStrategy::BroadcastRowElement: os << "broadcast per row"; break;
            case LoadStrategy::VectorRow: os << "vector row load"; break;
            case LoadStrategy::BroadcastConstant: os << "broadcast once"; break;
        }
        os << ", " << l.registers << " register" << (l.registers == 1 ? "" : "s") << "\n";
    }
    os << "\nper k step: " << ct.plan.vector_loads_per_k << " vector loads, "
       << ct.plan.broadcasts_per_k << " broadcasts; " << ct.plan.accumulator_slots
       << " accumulator registers\n";
    emit(cfg, os.str());
    return 0;
}

const char* error_class(const EngineError& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "parse error";
    if (dynamic_cast<const UnboundVariable*>(&e)) return "unbound variable";
    if (dynamic_cast<const UnsupportedExpression*>(&e)) return "unsupported expression";
    if (dynamic_cast<const NoFeasibleKernel*>(&e)) return "no feasible kernel";
    if (dynamic_cast<const MissingBinding*>(&e)) return "missing binding";
    if (dynamic_cast<const NonPositiveTime*>(&e)) return "non-positive time";
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive execution engine for matrix-multiplication-like tasks"};
    app.require_subcommand(1);
    CliConfig cfg;

    CLI::App* run = app.add_subcommand("run", "Execute a task and report elapsed time and SPR");
    add_task_options(run, cfg);
    add_data_options(run, cfg);
    run->add_option("--mode", cfg.mode, "adaptive, fixed, or naive")
        ->check(CLI::IsMember({"adaptive", "fixed", "naive"}));
    run->add_option("--kc", cfg.kc, "Fixed-mode cache depth");
    run->add_option("--nc", cfg.nc, "Fixed-mode tile width");
    run->add_flag("--verify", cfg.verify, "Check the result against the naive interpreter");
    run->add_option("--format", cfg.format, "Report format")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    run->add_option("--trials", cfg.trials, "Repetitions aggregated into the report")
        ->check(CLI::PositiveNumber);
    run->add_option("--agg", cfg.agg, "Aggregate over trials")
        ->check(CLI::IsMember({"min", "mean"}));

    CLI::App* tune = app.add_subcommand("tune", "Run the adaptive search and print the report");
    add_task_options(tune, cfg);
    add_data_options(tune, cfg);

    CLI::App* bench =
        app.add_subcommand("bench", "Sweep a power-of-two (kc, nc) grid and emit CSV");
    add_task_options(bench, cfg);
    add_data_options(bench, cfg);
    bench->add_option("--trials", cfg.trials, "Repetitions per grid cell")
        ->check(CLI::PositiveNumber);
    bench->add_option("--agg", cfg.agg, "Aggregate over trials")
        ->check(CLI::IsMember({"min", "mean"}));

    CLI::App* explain =
        app.add_subcommand("explain", "Print recognition, DAG, program, and kernel plan");
    add_task_options(explain, cfg);
    explain->add_option("--out", cfg.out, "Write the report to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(cfg);
        if (tune->parsed()) return cmd_tune(cfg);
        if (bench->parsed()) return cmd_bench(cfg);
        if (explain->parsed()) return cmd_explain(cfg);
    } catch (const EngineError& e) {
        std::cerr << error_class(e) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
