#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <unistd.h>

#include "amlt/engine.hpp"
#include "amlt/errors.hpp"
#include "amlt/presets.hpp"

#include "test_support.hpp"

using namespace amlt;

namespace {

std::string tmp_path(const char* stem) {
    return std::string("/tmp/amlt_test_") + stem + "_" + std::to_string(::getpid()) + ".amlt";
}

}  // namespace

TEST_CASE("the preset library enumerates 52 tasks and all compile") {
    std::vector<std::string> names = all_preset_names();
    CHECK(names.size() == 52);
    MachineModel m;
    for (const auto& name : names) {
        CAPTURE(name);
        auto src = preset_source(name);
        REQUIRE(src.has_value());
        CompiledTask ct = compile_task(*src, m);
        CHECK(ct.mmlt);
    }
    CHECK_FALSE(preset_source("q4").has_value());
    CHECK_FALSE(preset_source("matmul-tj").has_value());  // matmul has no threshold
    CHECK_FALSE(preset_source("q1-").has_value());
    CHECK_FALSE(preset_source("q1-tx").has_value());
    CHECK_FALSE(preset_source("q1-tj-ab-extra").has_value());
}

TEST_CASE("short preset names expand to their defaults") {
    CHECK(*preset_source("q1") == *preset_source("q1-tj-ab"));
    CHECK(*preset_source("q2") == *preset_source("q2-tj-ab"));
    CHECK(*preset_source("q3") == *preset_source("q3-tc-ab"));
    CHECK(*preset_source("matmul") == *preset_source("matmul-ab"));
    CHECK(*preset_source("q1-atb") == *preset_source("q1-tj-atb"));
    CHECK(*preset_source("q1-tij") == *preset_source("q1-tij-ab"));
}

TEST_CASE("orientation suffixes transpose the statement reads") {
    CompiledTask ab = compile_task(*preset_source("matmul-ab"), MachineModel{});
    CHECK(ab.recog.layout_a == OperandLayout::Normal);
    CHECK(ab.recog.layout_b == OperandLayout::Normal);
    CompiledTask atbt = compile_task(*preset_source("matmul-atbt"), MachineModel{});
    CHECK(atbt.recog.layout_a == OperandLayout::Transposed);
    CHECK(atbt.recog.layout_b == OperandLayout::Transposed);
}

TEST_CASE("threshold suffixes pick the aux class") {
    auto cls_of = [](const char* name) {
        CompiledTask ct = compile_task(*preset_source(name), MachineModel{});
        REQUIRE(!ct.recog.aux.empty());
        return ct.recog.aux[0].cls;
    };
    CHECK(cls_of("q1-ti") == LeafClass::VecI);
    CHECK(cls_of("q1-tj") == LeafClass::VecJ);
    CHECK(cls_of("q1-tij") == LeafClass::MatIJ);
    CompiledTask tc = compile_task(*preset_source("q1-tc"), MachineModel{});
    // Constant threshold is the literal 100: dis[j] is the only named aux.
    REQUIRE(tc.recog.aux.size() == 1);
    CHECK(tc.recog.aux[0].name == "dis");
}

TEST_CASE("dimension binding follows loop roles") {
    CompiledTask ct = compile_task(
        "where(t in [0..S] and r in [0..P] and c in [0..Q]) {\n"
        "  R[r][c] += A[r][t]*B[t][c];\n"
        "}\n",
        MachineModel{});
    DimBinding bind = bind_dims(ct, 40, 50, 60);  // M, K, N
    CHECK(bind.dims.at("P") == 40);
    CHECK(bind.dims.at("S") == 50);
    CHECK(bind.dims.at("Q") == 60);
    CHECK(bind.bounds.i1 == 40);
    CHECK(bind.bounds.k1 == 50);
    CHECK(bind.bounds.j1 == 60);
}

TEST_CASE("a dimension name bound twice must agree") {
    CompiledTask ct = compile_task(
        "where(i in [0..N] and j in [0..N] and k in [0..K]) {\n"
        "  R[i][j] += A[i][k]*B[k][j];\n"
        "}\n",
        MachineModel{});
    CHECK_THROWS_AS(bind_dims(ct, 40, 50, 60), EngineError);
    DimBinding ok = bind_dims(ct, 40, 50, 40);  // M == N: consistent
    CHECK(ok.dims.at("N") == 40);
    CHECK(ok.dims.at("K") == 50);
}

TEST_CASE("numeric range ends ignore the dimension triple") {
    CompiledTask ct = compile_task(
        "where(i in [0..24] and j in [0..32] and k in [2..10]) {\n"
        "  R[i][j] += A[i][k]*B[k][j];\n"
        "}\n",
        MachineModel{});
    DimBinding bind = bind_dims(ct, 999, 999, 999);
    CHECK(bind.bounds.i1 == 24);
    CHECK(bind.bounds.j1 == 32);
    CHECK(bind.bounds.k0 == 2);
    CHECK(bind.bounds.k1 == 10);

    TaskData data = make_task_data(ct, bind, 5, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                   DataMode::IntValued);
    CHECK(data.buf("R").rows() == 24);
    CHECK(data.buf("R").cols() == 32);
    CHECK(data.buf("A").cols() == 10);  // sized by the k range end

    SteadyClock clock;
    run_adaptive(ct, data, bind, false, clock);
    VerifyResult v = verify_against_naive(ct, data, bind, DataMode::IntValued);
    CHECK(v.exact);
}

TEST_CASE("nonzero range starts leave the low rows and columns untouched") {
    CompiledTask ct = compile_task(
        "where(i in [2..M] and j in [3..N] and k in [1..K]) {\n"
        "  R[i][j] += A[i][k]*B[k][j];\n"
        "}\n",
        MachineModel{});
    DimBinding bind = bind_dims(ct, 30, 20, 40);
    TaskData data = make_task_data(ct, bind, 7, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                   DataMode::IntValued);
    SteadyClock clock;
    run_adaptive(ct, data, bind, false, clock);
    VerifyResult v = verify_against_naive(ct, data, bind, DataMode::IntValued);
    CHECK(v.exact);
    for (std::int64_t i = 0; i < 30; ++i)
        for (std::int64_t j = 0; j < 40; ++j)
            if (i < 2 || j < 3) REQUIRE(data.result().at(i, j) == 0.0);
}

TEST_CASE("every preset matches naive exactly on int data") {
    struct Dim {
        std::int64_t M, K, N;
    } dims[] = {{32, 24, 40}, {13, 17, 5}};
    for (const auto& name : all_preset_names()) {
        CompiledTask ct = compile_task(*preset_source(name), MachineModel{});
        for (const auto& d : dims) {
            CAPTURE(name);
            CAPTURE(d.M);
            CAPTURE(d.K);
            CAPTURE(d.N);
            DimBinding bind = bind_dims(ct, d.M, d.K, d.N);
            TaskData data = make_task_data(ct, bind, 1, StorageOrder::RowMajor,
                                           StorageOrder::RowMajor, DataMode::IntValued);
            SteadyClock clock;
            run_adaptive(ct, data, bind, false, clock);
            VerifyResult v = verify_against_naive(ct, data, bind, DataMode::IntValued);
            CHECK(v.exact);
            CHECK(v.pass);
            CHECK(v.max_abs_err == 0.0);
        }
    }
}

TEST_CASE("real data verifies within tolerance, int stays exact, corruption fails") {
    CompiledTask ct = compile_task(*preset_source("q2"), MachineModel{});
    DimBinding bind = bind_dims(ct, 40, 30, 50);
    TaskData data = make_task_data(ct, bind, 9, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                   DataMode::Real);
    SteadyClock clock;
    run_adaptive(ct, data, bind, false, clock);
    VerifyResult v = verify_against_naive(ct, data, bind, DataMode::Real);
    CHECK(v.pass);
    CHECK(v.max_rel_err <= 1e-12);

    data.result().at(3, 4) += 0.5;
    VerifyResult bad = verify_against_naive(ct, data, bind, DataMode::Real);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.exact);
    CHECK(bad.max_abs_err >= 0.5);

    TaskData idata = make_task_data(ct, bind, 9, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                    DataMode::IntValued);
    run_adaptive(ct, idata, bind, false, clock);
    CHECK(verify_against_naive(ct, idata, bind, DataMode::IntValued).exact);
}

TEST_CASE("run_fixed matches run_adaptive values") {
    CompiledTask ct = compile_task(*preset_source("q1-atb"), MachineModel{});
    DimBinding bind = bind_dims(ct, 37, 29, 61);
    TaskData a = make_task_data(ct, bind, 3, StorageOrder::ColMajor, StorageOrder::ColMajor,
                                DataMode::IntValued);
    TaskData b = make_task_data(ct, bind, 3, StorageOrder::ColMajor, StorageOrder::ColMajor,
                                DataMode::IntValued);
    SteadyClock clock;
    run_adaptive(ct, a, bind, false, clock);
    double el = run_fixed(ct, b, bind, 8, 32, true, clock);
    CHECK(el >= 0.0);
    CHECK(a.result().same_contents(b.result()));
}

TEST_CASE("naive fallback handles unrecognized tasks end to end") {
    // Three multiplicand arrays: fails condition 4 but still runs.
    CompiledTask ct = compile_task(
        "where(i in [0..M] and j in [0..N] and k in [0..K]) {\n"
        "  R[i][j] += A[i][k]*B[k][j]*C[i][k];\n"
        "}\n",
        MachineModel{});
    CHECK_FALSE(ct.mmlt);
    CHECK(ct.why_not.failed_condition == 4);

    // Without recognized roles the loop ends bind in declaration order:
    // i gets M=8, j gets K=5, k gets N=6.
    DimBinding bind = bind_dims(ct, 8, 5, 6);
    TaskData data = make_task_data(ct, bind, 11, StorageOrder::RowMajor, StorageOrder::ColMajor,
                                   DataMode::IntValued);
    double el = run_naive_task(ct, data, bind);
    CHECK(el > 0.0);

    // Hand-rolled expectation.
    const MatrixBuffer& A = data.buf("A");
    const MatrixBuffer& B = data.buf("B");
    const MatrixBuffer& C = data.buf("C");
    for (std::int64_t i = 0; i < 8; ++i)
        for (std::int64_t j = 0; j < 5; ++j) {
            double want = 0;
            for (std::int64_t k = 0; k < 6; ++k) want += A.at(i, k) * B.at(k, j) * C.at(i, k);
            REQUIRE(data.result().at(i, j) == want);
        }
}

TEST_CASE("unrecognized tasks size arrays from their subscript ranges") {
    CompiledTask ct = compile_task(
        "where(i in [0..M] and j in [0..N] and k in [0..K]) {\n"
        "  R[i][j] += A[i][k]*B[k][j]*C[i][k] + u[k];\n"
        "}\n",
        MachineModel{});
    // Declaration-order binding: i in [0..8), j in [0..5), k in [0..6).
    DimBinding bind = bind_dims(ct, 8, 5, 6);
    TaskData data = make_task_data(ct, bind, 1, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                   DataMode::IntValued);
    CHECK(data.buf("A").rows() == 8);
    CHECK(data.buf("A").cols() == 6);
    CHECK(data.buf("B").rows() == 6);
    CHECK(data.buf("B").cols() == 5);
    CHECK(data.buf("C").rows() == 8);
    CHECK(data.buf("C").cols() == 6);
    CHECK(data.buf("u").rows() == 6);
    CHECK(data.buf("u").cols() == 1);
    CHECK(data.result().rows() == 8);
    CHECK(data.result().cols() == 5);
}

TEST_CASE("task data is deterministic in the seed and differs across names") {
    CompiledTask ct = compile_task(*preset_source("q1"), MachineModel{});
    DimBinding bind = bind_dims(ct, 16, 16, 16);
    TaskData d1 = make_task_data(ct, bind, 42, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                 DataMode::IntValued);
    TaskData d2 = make_task_data(ct, bind, 42, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                 DataMode::IntValued);
    CHECK(d1.buf("A").same_contents(d2.buf("A")));
    CHECK(d1.buf("B").same_contents(d2.buf("B")));
    CHECK(d1.buf("thres").same_contents(d2.buf("thres")));
    CHECK_FALSE(d1.buf("A").same_contents(d1.buf("B")));

    TaskData d3 = make_task_data(ct, bind, 43, StorageOrder::RowMajor, StorageOrder::RowMajor,
                                 DataMode::IntValued);
    CHECK_FALSE(d1.buf("A").same_contents(d3.buf("A")));

    // The result starts zeroed; int data lies in [-8, 8].
    for (std::int64_t i = 0; i < 16; ++i)
        for (std::int64_t j = 0; j < 16; ++j) {
            REQUIRE(d1.result().at(i, j) == 0.0);
            double v = d1.buf("A").at(i, j);
            REQUIRE(v == static_cast<double>(static_cast<int>(v)));
            REQUIRE(v >= -8.0);
            REQUIRE(v <= 8.0);
        }
}

TEST_CASE("gen_matrix is order-sensitive but value-deterministic") {
    MatrixBuffer rm = gen_matrix(7, 9, 11, StorageOrder::RowMajor, DataMode::IntValued);
    MatrixBuffer rm2 = gen_matrix(7, 9, 11, StorageOrder::RowMajor, DataMode::IntValued);
    CHECK(rm.same_contents(rm2));

    MatrixBuffer real = gen_matrix(7, 9, 11, StorageOrder::RowMajor, DataMode::Real);
    bool any_frac = false;
    for (std::int64_t i = 0; i < 9; ++i)
        for (std::int64_t j = 0; j < 11; ++j) {
            CHECK(real.at(i, j) >= 0.0);
            CHECK(real.at(i, j) < 1.0);
            if (real.at(i, j) != static_cast<std::int64_t>(real.at(i, j))) any_frac = true;
        }
    CHECK(any_frac);
}

TEST_CASE("matrix files round-trip bit exactly") {
    std::string path = tmp_path("roundtrip");
    for (StorageOrder order : {StorageOrder::RowMajor, StorageOrder::ColMajor}) {
        MatrixBuffer m = gen_matrix(123, 5, 7, order, DataMode::Real);
        write_matrix_file(path, m);
        MatrixBuffer back = read_matrix_file(path);
        CHECK(back.rows() == 5);
        CHECK(back.cols() == 7);
        CHECK(back.order() == order);
        CHECK(back.same_contents(m));
    }
    std::remove(path.c_str());
}

TEST_CASE("the matrix file header is laid out exactly") {
    std::string path = tmp_path("header");
    MatrixBuffer m(2, 3, StorageOrder::ColMajor);
    m.at(0, 0) = 1.0;
    m.at(1, 2) = -2.5;
    write_matrix_file(path, m);

    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 24 + 6 * 8);
    CHECK(bytes[0] == 'A');
    CHECK(bytes[1] == 'M');
    CHECK(bytes[2] == 'L');
    CHECK(bytes[3] == 'T');
    CHECK(bytes[4] == 2);  // rows, little endian
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 3);  // cols
    CHECK(bytes[12] == 1);  // order byte: column major
    for (int q = 13; q < 24; ++q) CHECK(bytes[static_cast<size_t>(q)] == 0);

    // Values in storage order: col-major puts (0,0)=1.0 first.
    double first = 0;
    std::memcpy(&first, bytes.data() + 24, 8);
    CHECK(first == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("malformed matrix files are rejected") {
    std::string path = tmp_path("bad");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS_AS(read_matrix_file(path), EngineError);
    {
        MatrixBuffer m(4, 4, StorageOrder::RowMajor);
        write_matrix_file(path, m);
        std::ifstream in(path, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() - 8);  // truncate payload
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(read_matrix_file(path), EngineError);
    CHECK_THROWS_AS(read_matrix_file("/tmp/amlt_does_not_exist.amlt"), EngineError);
    std::remove(path.c_str());
}

TEST_CASE("scaled rate is exact for the documented points") {
    CHECK(spr(1000, 1000, 1000, 0.1) == 10.0);
    CHECK(spr(1, 1, 1, 1.0) == 1e-9);
    CHECK(spr(2048, 1024, 512, 2.0) ==
          static_cast<double>(2048LL * 1024 * 512) / 2.0 * 1e-9);
    CHECK_THROWS_AS(spr(10, 10, 10, 0.0), NonPositiveTime);
    CHECK_THROWS_AS(spr(10, 10, 10, -1.0), NonPositiveTime);
}

TEST_CASE("adaptive and naive agree across random statements and layouts") {
    ts::TaskGen gen(1914);
    std::mt19937_64 rng(8);
    int n_checked = 0;
    for (int n = 0; n < 25; ++n) {
        ts::RandomTask rt = gen.next();
        CAPTURE(rt.source);
        StorageOrder oa = n % 2 ? StorageOrder::ColMajor : StorageOrder::RowMajor;
        StorageOrder ob = n % 3 ? StorageOrder::ColMajor : StorageOrder::RowMajor;
        std::int64_t M = 5 + static_cast<std::int64_t>(rng() % 60);
        std::int64_t K = 1 + static_cast<std::int64_t>(rng() % 70);
        std::int64_t N = 5 + static_cast<std::int64_t>(rng() % 90);
        bool pack = n % 2 == 0;
        ts::AdaptiveVsNaive r = ts::adaptive_vs_naive(rt.source, M, K, N, rng(), pack,
                                                      DataMode::IntValued, oa, ob);
        CHECK(r.verify.exact);
        ++n_checked;
    }
    CHECK(n_checked == 25);
}
