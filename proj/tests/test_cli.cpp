// End-to-end checks of the command-line tool: exit codes, file formats and
// byte-for-byte reproducibility. Invoked as: cli_tests <path-to-swmas>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
    std::cout << (ok ? "[ok] " : "[FAILED] ") << what << "\n";
    if (!ok) ++g_failures;
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

RunResult run(const std::string& command) {
    RunResult result;
    FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buffer{};
    std::size_t got = 0;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        result.output.append(buffer.data(), got);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-swmas>\n";
        return 2;
    }
    const std::string tool = argv[1];
    const std::string tmp = "cli_test_tmp";
    std::system(("rm -rf " + tmp + " && mkdir -p " + tmp).c_str());

    // --- analyze ---
    {
        const RunResult r = run(tool +
                                " analyze --consensus -N 20 --kappa 0.1 -p 0.5"
                                " --lo 2.68 --hi 18.24 --deflate");
        expect(r.exit_code == 0, "analyze certifies the consensus instance");
        expect(r.output.find("h2_bound: 83.75") != std::string::npos,
               "analyze reports the expected bound");

        const RunResult infeasible = run(tool +
                                         " analyze --consensus -N 20 --kappa 0.2 -p 1"
                                         " --lo 2.68 --hi 18.24 --deflate");
        expect(infeasible.exit_code == 2, "no certificate exits with code 2");
        expect(infeasible.output.find("does not prove instability") != std::string::npos,
               "no-certificate message cites sufficiency-only semantics");

        expect(run(tool + " analyze --consensus -p 0.5 --lo 2 --hi 4").exit_code == 1,
               "marginally stable block without --deflate is a usage error");
        expect(run(tool + " analyze -p 0.5").exit_code == 1,
               "analyze without a model is a usage error");
        expect(run(tool + " analyze --model does_not_exist.txt -p 0.5").exit_code == 1,
               "missing model file is a usage error");
        expect(run(tool + " bogus-subcommand").exit_code == 1,
               "unknown subcommand is a usage error");
    }

    // --- model files ---
    {
        std::ofstream model(tmp + "/k4.txt");
        model << "n 4\ngraph\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n"
              << "bounds 4 4\nblocks 1 1 1\n"
              << "Ad 1\nAc -0.1\nAp 0\nBd 1\nBc 0\nBp 0\nCd 0\nCc 0\nCp 1\n"
              << "Dd 0\nDc 0\nDp 0\n";
        model.close();
        const RunResult r =
            run(tool + " analyze --model " + tmp + "/k4.txt -p 0.5 --deflate");
        expect(r.exit_code == 0, "analyze accepts a model file");

        std::ofstream bad(tmp + "/bad.txt");
        bad << "n 4\ngraph\ne 1\n";
        bad.close();
        const RunResult b = run(tool + " analyze --model " + tmp + "/bad.txt -p 0.5");
        expect(b.exit_code == 1, "parse errors exit with code 1");
    }

    // --- spectrum ---
    {
        const std::string out = tmp + "/spec.csv";
        const RunResult r = run(tool + " spectrum --circulant 20:7 --lo 2.68 --hi 18.24 -o " + out);
        expect(r.exit_code == 0, "spectrum runs");
        const auto rows = parse_csv(slurp(out));
        expect(rows.size() == 1 + 7 * 20, "spectrum emits one row per eigenvalue");
        expect(rows[0] == std::vector<std::string>{"graph_index", "eig_index", "value"},
               "spectrum header matches the interface");
    }

    // --- contour ---
    {
        const std::string out = tmp + "/contour.csv";
        const RunResult r =
            run(tool + " contour --variant consensus --grid 8 -o " + out);
        expect(r.exit_code == 0, "contour runs");
        const auto rows = parse_csv(slurp(out));
        expect(rows.size() == 1 + 8 * 9 / 2, "contour covers the admissible triangle");
        bool triangle = true, has_gamma = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            triangle = triangle && std::stod(rows[i][0]) <= std::stod(rows[i][1]) + 1e-12;
            has_gamma = has_gamma && rows[i].size() == 3;
        }
        expect(triangle, "contour rows satisfy lo <= hi");
        expect(has_gamma, "contour rows carry a gamma column");

        const std::string again = tmp + "/contour2.csv";
        run(tool + " contour --variant consensus --grid 8 -o " + again);
        expect(slurp(out) == slurp(again), "contour reruns byte-identically");
    }

    // --- span ---
    {
        const std::string out = tmp + "/span.csv";
        const std::string detail = tmp + "/span_detail.csv";
        const std::string raw = tmp + "/span_raw.csv";
        const std::string cmd = tool + " span --circulant 8:2 --lo 0.58 --hi 6.25" +
                                " --pcount 3 --pmin 0.3 --pmax 1 --samples 4 --horizon 500" +
                                " --deflate --seed 11 -o " + out + " --detail " + detail +
                                " --raw " + raw;
        const RunResult r = run(cmd);
        expect(r.exit_code == 0, "span runs");
        const auto rows = parse_csv(slurp(out));
        expect(rows.size() == 1 + 3, "span emits one row per probability");
        expect(rows[0] ==
                   std::vector<std::string>{"p", "h2_bound", "h2_mc_min", "h2_mc_max"},
               "span header matches the interface");
        bool ordered = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            ordered = ordered && std::stod(rows[i][2]) <= std::stod(rows[i][3]) + 1e-12;
        }
        expect(ordered, "span min column never exceeds max column");

        const auto detail_rows = parse_csv(slurp(detail));
        expect(detail_rows.size() == 1 + 3 * (2 + 1 + 2),
               "detail covers every (p, sequence) pair");
        const auto raw_rows = parse_csv(slurp(raw));
        expect(raw_rows.size() == 1 + 3 * 5 * 8 * 4,
               "raw covers every (p, sequence, channel, draw) energy");

        const std::string again = tmp + "/span2.csv";
        run(tool + " span --circulant 8:2 --lo 0.58 --hi 6.25 --pcount 3 --pmin 0.3" +
            " --pmax 1 --samples 4 --horizon 500 --deflate --seed 11 -o " + again);
        expect(slurp(out) == slurp(again), "span reruns byte-identically");
    }

    // --- verify ---
    {
        expect(run(tool + " verify").exit_code == 0, "verify passes on a fresh build");
        expect(run(tool + " verify --seed 123").exit_code == 0,
               "verify is seed-insensitive for the deterministic checks");
        expect(run(tool + " verify --corrupt-lemma1").exit_code == 3,
               "corrupted expectation coefficient is caught (exit 3)");
    }

    std::system(("rm -rf " + tmp).c_str());
    if (g_failures == 0) {
        std::cout << "cli_tests: all checks passed\n";
        return 0;
    }
    std::cout << "cli_tests: " << g_failures << " check(s) failed\n";
    return 1;
}
