// Copyright 2026-present the nibblescan project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark harness: train / search / selftest / gen subcommands.
// Exit codes: 0 success, 1 usage, 2 data or format error, 3 property failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nibblescan/dataset.hpp"
#include "nibblescan/errors.hpp"
#include "nibblescan/fastscan.hpp"
#include "nibblescan/ivf.hpp"
#include "nibblescan/kmeans.hpp"
#include "nibblescan/pq.hpp"
#include "nibblescan/rng.hpp"

namespace ns = nibblescan;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProperty = 3;

/// Raised by selftest when a property check finds a counterexample.
class PropertyFailure : public std::runtime_error {
  public:
    explicit PropertyFailure(const std::string& msg)
            : std::runtime_error(msg) {}
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count();
}

int thread_count() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("Threads:", 0) == 0) {
            return std::stoi(line.substr(8));
        }
    }
    return 1; // no procfs; assume single-threaded
}

struct SyntheticSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t clusters = 0;
};

SyntheticSpec parse_synthetic(const std::string& spec) {
    SyntheticSpec out;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(spec);
    if (!(in >> out.n >> c1 >> out.d >> c2 >> out.clusters) || c1 != ',' ||
        c2 != ',' || !in.eof()) {
        throw ns::ArgumentError("--synthetic expects n,d,clusters, got '" +
                                spec + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    std::size_t n = 10000;
    std::size_t d = 32;
    std::size_t clusters = 16;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t queries_n = 0;
    std::string queries_out;
    std::string gt_out;
    std::size_t gt_k = 10;
};

int run_gen(const GenArgs& args) {
    if (!args.queries_out.empty() && args.queries_n == 0) {
        throw ns::ArgumentError("--queries-out requires --queries-n > 0");
    }
    if (!args.gt_out.empty() && args.queries_out.empty()) {
        throw ns::ArgumentError("--gt-out requires --queries-out");
    }
    // Base and queries come from one draw so they share cluster centers;
    // the first n rows are identical to a base-only draw with this seed.
    const ns::VectorSet all = ns::gen_synthetic(
            args.n + args.queries_n, args.d, args.clusters, args.seed);
    ns::VectorSet base(args.n, args.d);
    std::copy_n(all.data.begin(), args.n * args.d, base.data.begin());
    ns::write_fvecs(args.out, base);
    std::cout << "wrote " << base.n << "x" << base.d << " vectors to "
              << args.out << "\n";

    if (!args.queries_out.empty()) {
        ns::VectorSet queries(args.queries_n, args.d);
        std::copy_n(all.data.begin() + args.n * args.d,
                    args.queries_n * args.d, queries.data.begin());
        ns::write_fvecs(args.queries_out, queries);
        std::cout << "wrote " << queries.n << "x" << queries.d
                  << " queries to " << args.queries_out << "\n";
        if (!args.gt_out.empty()) {
            const auto gt = ns::ground_truth(base, queries, args.gt_k);
            ns::IntMatrix m;
            m.n = gt.nq;
            m.d = gt.k;
            m.values = gt.ids;
            ns::write_ivecs(args.gt_out, m);
            std::cout << "wrote " << gt.nq << "x" << gt.k
                      << " ground truth to " << args.gt_out << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data;
    std::string synthetic;
    std::uint64_t seed = 0;
    std::size_t m = 16;
    std::size_t nlist = 0; // 0: sqrt(n) heuristic
    std::string out;
};

int run_train(const TrainArgs& args) {
    if (args.data.empty() == args.synthetic.empty()) {
        throw ns::ArgumentError(
                "exactly one of --data and --synthetic is required");
    }
    ns::VectorSet base;
    if (!args.data.empty()) {
        base = ns::read_fvecs(args.data);
    } else {
        const auto spec = parse_synthetic(args.synthetic);
        base = ns::gen_synthetic(spec.n, spec.d, spec.clusters, args.seed);
    }
    if (base.n == 0) {
        throw ns::ArgumentError("training set is empty");
    }
    const std::size_t nlist =
            args.nlist > 0 ? args.nlist : ns::default_nlist(base.n);

    const auto t0 = std::chrono::steady_clock::now();
    ns::IVFIndex index = ns::train_ivf(base, nlist, args.m, args.seed);
    const double train_ms = elapsed_ms(t0);

    const auto t1 = std::chrono::steady_clock::now();
    index.add(base, 0);
    const double add_ms = elapsed_ms(t1);

    index.save(args.out);

    std::size_t min_list = base.n;
    std::size_t max_list = 0;
    for (std::size_t i = 0; i < index.nlist(); ++i) {
        min_list = std::min(min_list, index.list_ids(i).size());
        max_list = std::max(max_list, index.list_ids(i).size());
    }
    std::cout << "trained index: n=" << index.ntotal() << " d=" << index.dim()
              << " m=" << index.codebook().m << " k=16 nlist=" << index.nlist()
              << "\n"
              << "list sizes: min=" << min_list << " mean="
              << static_cast<double>(index.ntotal()) /
                         static_cast<double>(index.nlist())
              << " max=" << max_list << "\n"
              << std::fixed << std::setprecision(1) << "train: " << train_ms
              << " ms, encode+add: " << add_ms << " ms\n"
              << "saved to " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
    std::string index;
    std::string queries;
    std::string gt;
    std::string method = "ivf-fastscan";
    std::string nprobes = "1";
    std::size_t topk = 10;
    std::size_t trials = 5;
    std::string backend;
    std::string dump_results;
};

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoull(tok, &pos));
            if (pos != tok.size()) {
                throw std::invalid_argument(tok);
            }
        } catch (const std::exception&) {
            throw ns::ArgumentError("expected a comma-separated number list, "
                                    "got '" +
                                    s + "'");
        }
    }
    if (out.empty()) {
        throw ns::ArgumentError("empty list: '" + s + "'");
    }
    return out;
}

/// One benchmark measurement; a CSV row.
struct BenchResult {
    std::string method;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t nlist = 0;
    std::size_t nprobe = 0; // 0 for flat methods
    double recall_at_1 = 0.0;
    double ms_per_query = 0.0;
    double queries_per_second = 0.0;
    std::string backend;
};

void print_csv_header() {
    std::cout << "method,m,k,nlist,nprobe,recall_at_1,ms_per_query,qps,"
                 "backend\n";
}

void print_csv_row(const BenchResult& r) {
    std::cout << r.method << "," << r.m << "," << r.k << "," << r.nlist
              << "," << r.nprobe << "," << std::setprecision(8)
              << r.recall_at_1 << "," << r.ms_per_query << ","
              << r.queries_per_second << "," << r.backend << "\n";
}

BenchResult make_result(const std::string& method,
                        const ns::IVFIndex& index,
                        std::size_t nprobe,
                        double recall,
                        double ms_per_query) {
    return BenchResult{method,
                       index.codebook().m,
                       index.codebook().k,
                       index.nlist(),
                       nprobe,
                       recall,
                       ms_per_query,
                       1000.0 / ms_per_query,
                       std::string(ns::active_backend_name())};
}

double recall_at_1(const std::vector<std::vector<ns::Neighbor>>& results,
                   const ns::GroundTruth& gt) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < results.size(); ++q) {
        if (!results[q].empty() &&
            results[q][0].id == static_cast<std::int64_t>(gt.row(q)[0])) {
            ++hits;
        }
    }
    return results.empty()
                   ? 0.0
                   : static_cast<double>(hits) /
                             static_cast<double>(results.size());
}

// Timed single-threaded loop over all queries: one warmup pass, then
// `trials` measured passes, mean ms/query. Per-query work includes the
// table build (and quantization where applicable) but not index loading or
// code layout, which happened before we were called.
template <typename SearchFn>
std::pair<double, std::vector<std::vector<ns::Neighbor>>> timed_sweep(
        const ns::VectorSet& queries,
        std::size_t trials,
        SearchFn&& search_one) {
    std::vector<std::vector<ns::Neighbor>> results(queries.n);
    for (std::size_t q = 0; q < queries.n; ++q) { // warmup, discarded
        results[q] = search_one(queries.vec(q));
    }
    double total_ms = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t q = 0; q < queries.n; ++q) {
            results[q] = search_one(queries.vec(q));
        }
        total_ms += elapsed_ms(t0);
    }
    const double ms_per_query =
            total_ms / static_cast<double>(trials * queries.n);
    return {ms_per_query, std::move(results)};
}

void dump_results_ivecs(const std::string& path,
                        const std::vector<std::vector<ns::Neighbor>>& results,
                        std::size_t topk) {
    ns::IntMatrix m;
    m.n = results.size();
    m.d = topk;
    m.values.assign(m.n * m.d, -1);
    for (std::size_t q = 0; q < results.size(); ++q) {
        for (std::size_t j = 0; j < results[q].size() && j < topk; ++j) {
            m.values[q * topk + j] =
                    static_cast<std::int32_t>(results[q][j].id);
        }
    }
    ns::write_ivecs(path, m);
}

int run_search(const SearchArgs& args) {
    if (!args.backend.empty() && args.backend != "auto") {
        const auto parsed = ns::parse_backend(args.backend);
        if (!parsed) {
            throw ns::ArgumentError("unknown backend '" + args.backend + "'");
        }
        ns::set_active_backend(*parsed);
    }

    const ns::IVFIndex index = ns::IVFIndex::load(args.index);
    const ns::VectorSet queries = ns::read_fvecs(args.queries);
    if (!std::filesystem::exists(args.gt)) {
        throw ns::EvaluationError("ground truth file not found: " + args.gt);
    }
    const ns::IntMatrix gt_raw = ns::read_ivecs(args.gt);
    ns::GroundTruth gt;
    gt.nq = gt_raw.n;
    gt.k = gt_raw.d;
    gt.ids = gt_raw.values;

    print_csv_header();
    if (queries.n == 0) {
        return 0;
    }
    if (gt.nq != queries.n || gt.k < 1) {
        throw ns::EvaluationError(
                "ground truth shape " + std::to_string(gt.nq) + "x" +
                std::to_string(gt.k) + " does not match " +
                std::to_string(queries.n) + " queries");
    }
    if (queries.d != index.dim()) {
        throw ns::EvaluationError("query dimension does not match index");
    }
    if (thread_count() > 1) {
        std::cerr << "warning: timed loop is not single-threaded ("
                  << thread_count() << " threads)\n";
    }

    const std::size_t topk = args.topk;
    std::vector<std::vector<ns::Neighbor>> last_results;

    if (args.method == "pq-adc" || args.method == "fastscan") {
        const ns::PQCodes codes = index.flat_codes();
        const ns::PackedCodeBlocks packed =
                args.method == "fastscan" ? ns::pack_codes(codes)
                                          : ns::PackedCodeBlocks{};
        auto [ms, results] = timed_sweep(
                queries, args.trials, [&](std::span<const float> q) {
                    const ns::FloatLUT lut = ns::build_lut(index.codebook(), q);
                    if (args.method == "fastscan") {
                        return ns::fastscan_search(ns::quantize_lut(lut),
                                                   packed, topk);
                    }
                    return ns::adc_scan(lut, codes, topk);
                });
        print_csv_row(make_result(args.method, index, 0,
                                  recall_at_1(results, gt), ms));
        last_results = std::move(results);
    } else if (args.method == "ivf-fastscan") {
        for (const std::size_t nprobe : parse_size_list(args.nprobes)) {
            auto [ms, results] = timed_sweep(
                    queries, args.trials, [&](std::span<const float> q) {
                        return index.search(q, {nprobe, topk});
                    });
            print_csv_row(make_result(args.method, index, nprobe,
                                      recall_at_1(results, gt), ms));
            last_results = std::move(results);
        }
    } else {
        throw ns::ArgumentError("unknown method '" + args.method +
                                "' (expected pq-adc | fastscan | "
                                "ivf-fastscan)");
    }

    if (!args.dump_results.empty()) {
        dump_results_ivecs(args.dump_results, last_results, topk);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// selftest

struct SelftestArgs {
    std::size_t cases = 10000;
    std::uint64_t seed = 42;
    std::string backend;
    bool inject_pack_fault = false;
};

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (const auto b : bytes) {
        out << std::setw(2) << static_cast<int>(b);
    }
    return out.str();
}

ns::Reg32 random_reg(ns::SplitMix64& rng) {
    ns::Reg32 r;
    for (auto& b : r.b) {
        b = static_cast<std::uint8_t>(rng.next_below(256));
    }
    return r;
}

void selftest_kernels(const SelftestArgs& args,
                      const std::vector<ns::Backend>& backends) {
    for (const ns::Backend b : backends) {
        if (b == ns::Backend::scalar) {
            continue;
        }
        ns::SplitMix64 rng(args.seed);
        for (std::size_t c = 0; c < args.cases; ++c) {
            const ns::Reg32 table = random_reg(rng);
            const ns::Reg32 idx = random_reg(rng);
            const ns::Reg32 expect =
                    ns::lane_pair_shuffle(table, idx, ns::Backend::scalar);
            const ns::Reg32 got = ns::lane_pair_shuffle(table, idx, b);
            if (got != expect) {
                throw PropertyFailure(
                        "lane_pair_shuffle mismatch on backend " +
                        std::string(ns::backend_name(b)) + "\n  table=" +
                        hex_bytes(table.b) + "\n  idx=" + hex_bytes(idx.b) +
                        "\n  scalar=" + hex_bytes(expect.b) + "\n  got=" +
                        hex_bytes(got.b));
            }
            const ns::Reg32 v = random_reg(rng);
            const std::uint32_t mask_s = ns::movemask32(v, ns::Backend::scalar);
            const std::uint32_t mask_b = ns::movemask32(v, b);
            if (mask_s != mask_b) {
                throw PropertyFailure("movemask32 mismatch on backend " +
                                      std::string(ns::backend_name(b)) +
                                      "\n  v=" + hex_bytes(v.b));
            }
        }
        std::cout << "[ok] lane_pair_shuffle/movemask32: "
                  << ns::backend_name(b) << " == scalar (" << args.cases
                  << " cases)\n";
    }
}

void selftest_accumulate(const SelftestArgs& args,
                         const std::vector<ns::Backend>& backends) {
    ns::SplitMix64 rng(args.seed + 1);
    const std::size_t cases = std::max<std::size_t>(1, args.cases / 10);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t m = 1 + rng.next_below(32);
        ns::QuantizedLUT qlut;
        qlut.m = m;
        qlut.bytes.resize(m * 16);
        for (auto& b : qlut.bytes) {
            b = static_cast<std::uint8_t>(rng.next_below(256));
        }
        std::vector<std::uint8_t> block(m * 16);
        for (auto& b : block) {
            b = static_cast<std::uint8_t>(rng.next_below(256));
        }
        // independent route: unpack nibbles and sum rows directly
        std::array<std::uint16_t, 32> expect{};
        for (std::size_t sub = 0; sub < m; ++sub) {
            for (std::size_t p = 0; p < 16; ++p) {
                expect[p] += qlut.bytes[sub * 16 + (block[sub * 16 + p] & 15)];
                expect[16 + p] +=
                        qlut.bytes[sub * 16 + (block[sub * 16 + p] >> 4)];
            }
        }
        for (const ns::Backend b : backends) {
            std::array<std::uint16_t, 32> acc{};
            ns::block_accumulate(qlut, block.data(),
                                 std::span<std::uint16_t, 32>(acc), b);
            if (acc != expect) {
                throw PropertyFailure(
                        "block_accumulate mismatch on backend " +
                        std::string(ns::backend_name(b)) + " (m=" +
                        std::to_string(m) + ")\n  lut=" +
                        hex_bytes(qlut.bytes) + "\n  block=" +
                        hex_bytes(block));
            }
        }
    }
    std::cout << "[ok] block_accumulate: all backends match unpack-and-sum ("
              << cases << " cases)\n";
}

void selftest_pack_roundtrip(const SelftestArgs& args) {
    ns::SplitMix64 rng(args.seed + 2);
    const std::size_t cases = std::max<std::size_t>(1, args.cases / 10);
    for (std::size_t c = 0; c < cases; ++c) {
        ns::PQCodes codes;
        codes.n = 1 + rng.next_below(150);
        codes.m = 1 + rng.next_below(24);
        codes.codes.resize(codes.n * codes.m);
        for (auto& v : codes.codes) {
            v = static_cast<std::uint8_t>(rng.next_below(16));
        }
        ns::PackedCodeBlocks packed = ns::pack_codes(codes);
        if (args.inject_pack_fault && c == cases / 2) {
            packed.bytes[packed.bytes.size() / 2] ^= 0x01;
        }
        const ns::PQCodes back = ns::unpack_codes(packed);
        if (back.codes != codes.codes) {
            std::size_t first = 0;
            while (back.codes[first] == codes.codes[first]) {
                ++first;
            }
            throw PropertyFailure(
                    "pack/unpack round trip failed (n=" +
                    std::to_string(codes.n) + ", m=" + std::to_string(codes.m) +
                    ")\n  first differing code index " + std::to_string(first) +
                    ": wrote " + std::to_string(codes.codes[first]) +
                    ", read " + std::to_string(back.codes[first]));
        }
    }
    std::cout << "[ok] pack/unpack round trip (" << std::max<std::size_t>(
                         1, args.cases / 10)
              << " cases)\n";
}

void selftest_quantize_bound(const SelftestArgs& args) {
    ns::SplitMix64 rng(args.seed + 3);
    const std::size_t cases = std::max<std::size_t>(1, args.cases / 100);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t m = 1 + rng.next_below(16);
        ns::FloatLUT lut;
        lut.m = m;
        lut.k = 16;
        lut.values.resize(m * 16);
        for (auto& v : lut.values) {
            v = static_cast<float>(rng.next_double() * 40.0);
        }
        const ns::QuantizedLUT qlut = ns::quantize_lut(lut);
        const double bound = 0.5 * static_cast<double>(m) /
                             static_cast<double>(qlut.scale);
        for (std::size_t t = 0; t < 200; ++t) {
            std::uint32_t acc = 0;
            double exact = 0.0;
            for (std::size_t sub = 0; sub < m; ++sub) {
                const std::size_t code = rng.next_below(16);
                acc += qlut.bytes[sub * 16 + code];
                exact += static_cast<double>(lut.at(sub, code));
            }
            const double err =
                    std::abs(static_cast<double>(qlut.dequantize(acc)) - exact);
            if (err > bound) {
                throw PropertyFailure(
                        "dequantization error " + std::to_string(err) +
                        " exceeds bound " + std::to_string(bound) + " (m=" +
                        std::to_string(m) + ", scale=" +
                        std::to_string(qlut.scale) + ")");
            }
        }
    }
    std::cout << "[ok] quantized table error bound (" << cases
              << " tables x 200 tuples)\n";
}

int run_selftest(const SelftestArgs& args) {
    std::vector<ns::Backend> backends;
    if (!args.backend.empty() && args.backend != "auto") {
        const auto parsed = ns::parse_backend(args.backend);
        if (!parsed) {
            throw ns::ArgumentError("unknown backend '" + args.backend + "'");
        }
        if (!ns::backend_available(*parsed)) {
            throw ns::ArgumentError("backend not available: " + args.backend);
        }
        backends = {ns::Backend::scalar, *parsed};
    } else {
        backends = ns::available_backends();
    }
    std::cout << "active backend: " << ns::active_backend_name() << "\n";
    selftest_kernels(args, backends);
    selftest_accumulate(args, backends);
    selftest_pack_roundtrip(args);
    selftest_quantize_bound(args);
    std::cout << "selftest passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"4-bit product-quantization search benchmark"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cmd_gen = app.add_subcommand(
            "gen", "emit a synthetic dataset as fvecs (optionally with "
                   "queries and exact ground truth)");
    cmd_gen->add_option("--n", gen.n, "base vector count");
    cmd_gen->add_option("--d", gen.d, "dimension");
    cmd_gen->add_option("--clusters", gen.clusters, "cluster count");
    cmd_gen->add_option("--seed", gen.seed, "random seed");
    cmd_gen->add_option("--out", gen.out, "output fvecs path")->required();
    cmd_gen->add_option("--queries-n", gen.queries_n, "query count");
    cmd_gen->add_option("--queries-out", gen.queries_out,
                        "query fvecs output path");
    cmd_gen->add_option("--gt-out", gen.gt_out,
                        "exact ground truth ivecs output path");
    cmd_gen->add_option("--gt-k", gen.gt_k, "neighbors per ground truth row");

    TrainArgs train;
    auto* cmd_train = app.add_subcommand(
            "train", "train an IVF + 4-bit PQ index and save it");
    cmd_train->add_option("--data", train.data, "training fvecs path");
    cmd_train->add_option("--synthetic", train.synthetic,
                          "synthetic spec n,d,clusters");
    cmd_train->add_option("--m", train.m, "sub-quantizer count");
    cmd_train->add_option("--nlist", train.nlist,
                          "inverted list count (default sqrt(n))");
    cmd_train->add_option("--seed", train.seed, "random seed");
    cmd_train->add_option("--out", train.out, "index output path")->required();

    SearchArgs search;
    auto* cmd_search = app.add_subcommand(
            "search", "timed recall benchmark over a saved index (CSV)");
    cmd_search->add_option("--index", search.index, "index path")->required();
    cmd_search->add_option("--queries", search.queries, "query fvecs path")
            ->required();
    cmd_search->add_option("--gt", search.gt, "ground truth ivecs path")
            ->required();
    cmd_search->add_option("--method", search.method,
                           "pq-adc | fastscan | ivf-fastscan");
    cmd_search->add_option("--nprobe", search.nprobes,
                           "comma-separated nprobe sweep (ivf-fastscan)");
    cmd_search->add_option("--topk", search.topk, "neighbors per query");
    cmd_search->add_option("--trials", search.trials,
                           "timed trials (one warmup trial is discarded)");
    cmd_search->add_option("--backend", search.backend,
                           "scalar | simd128x2 | simd256 | auto");
    cmd_search->add_option("--dump-results", search.dump_results,
                           "write result ids as ivecs");

    SelftestArgs selftest;
    auto* cmd_selftest = app.add_subcommand(
            "selftest", "property suites over seeded random inputs");
    cmd_selftest->add_option("--cases", selftest.cases, "cases per suite");
    cmd_selftest->add_option("--seed", selftest.seed, "random seed");
    cmd_selftest->add_option("--backend", selftest.backend,
                             "restrict the kernel comparison to one backend");
    cmd_selftest
            ->add_flag("--inject-pack-fault", selftest.inject_pack_fault,
                       "corrupt a packed blob to exercise failure reporting")
            ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) {
            return run_gen(gen);
        }
        if (cmd_train->parsed()) {
            return run_train(train);
        }
        if (cmd_search->parsed()) {
            return run_search(search);
        }
        if (cmd_selftest->parsed()) {
            return run_selftest(selftest);
        }
    } catch (const PropertyFailure& e) {
        std::cerr << "property failure: " << e.what() << "\n";
        return kExitProperty;
    } catch (const ns::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ns::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
