#include "swmas/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace swmas {

namespace {

[[noreturn]] void fail(int line_no, const std::string& message) {
    throw std::runtime_error("model file, line " + std::to_string(line_no) + ": " +
                             message);
}

struct PendingGraph {
    std::vector<Edge> edges;
};

}  // namespace

ModelFile parse_model(std::istream& in) {
    int n_vertices = 0;
    std::vector<PendingGraph> graphs;
    bool have_bounds = false;
    double lo = 0.0, hi = 0.0;

    bool have_blocks = false;
    int n_x = 0, n_w = 0, n_z = 0;
    // Ad Ac Ap Bd Bc Bp Cd Cc Cp Dd Dc Dp in declaration order
    std::vector<std::optional<Eigen::MatrixXd>> block_values(12);
    static const char* kBlockNames[12] = {"Ad", "Ac", "Ap", "Bd", "Bc", "Bp",
                                          "Cd", "Cc", "Cp", "Dd", "Dc", "Dp"};

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream line(raw);
        std::string keyword;
        if (!(line >> keyword)) continue;

        if (keyword == "n") {
            if (n_vertices != 0) fail(line_no, "duplicate 'n' line");
            if (!(line >> n_vertices) || n_vertices <= 0) {
                fail(line_no, "'n' needs a positive vertex count");
            }
        } else if (keyword == "graph") {
            if (n_vertices == 0) fail(line_no, "'graph' before 'n'");
            graphs.emplace_back();
        } else if (keyword == "e") {
            if (graphs.empty()) fail(line_no, "'e' before any 'graph'");
            int a = 0, b = 0;
            if (!(line >> a >> b)) fail(line_no, "'e' needs two vertex labels");
            try {
                graphs.back().edges.push_back(make_edge(a, b));
            } catch (const std::exception& ex) {
                fail(line_no, ex.what());
            }
        } else if (keyword == "bounds") {
            if (!(line >> lo >> hi)) fail(line_no, "'bounds' needs two numbers");
            have_bounds = true;
        } else if (keyword == "blocks") {
            if (!(line >> n_x >> n_w >> n_z) || n_x <= 0 || n_w <= 0 || n_z <= 0) {
                fail(line_no, "'blocks' needs three positive dimensions");
            }
            have_blocks = true;
        } else {
            int which = -1;
            for (int i = 0; i < 12; ++i) {
                if (keyword == kBlockNames[i]) {
                    which = i;
                    break;
                }
            }
            if (which < 0) fail(line_no, "unknown keyword '" + keyword + "'");
            if (!have_blocks) fail(line_no, "block line before 'blocks'");
            const int rows = which < 6 ? n_x : n_z;
            const int cols = (which % 6) < 3 ? n_x : n_w;
            Eigen::MatrixXd m(rows, cols);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    if (!(line >> m(r, c))) {
                        fail(line_no, std::string(kBlockNames[which]) + " needs " +
                                          std::to_string(rows * cols) + " numbers");
                    }
                }
            }
            block_values[static_cast<std::size_t>(which)] = std::move(m);
        }
    }

    if (n_vertices == 0) fail(line_no, "missing 'n' line");
    if (graphs.empty()) fail(line_no, "model declares no graphs");
    if (!have_bounds) fail(line_no, "missing 'bounds' line");

    std::vector<Graph> members;
    for (auto& pg : graphs) {
        members.push_back(make_graph(n_vertices, std::move(pg.edges)));
    }

    ModelFile out{make_family(std::move(members), lo, hi), std::nullopt};
    if (have_blocks) {
        for (int i = 0; i < 12; ++i) {
            if (!block_values[static_cast<std::size_t>(i)]) {
                fail(line_no, std::string("missing block line '") + kBlockNames[i] + "'");
            }
        }
        DecomposableMatrices blocks;
        blocks.A = {*block_values[0], *block_values[1], *block_values[2]};
        blocks.B = {*block_values[3], *block_values[4], *block_values[5]};
        blocks.C = {*block_values[6], *block_values[7], *block_values[8]};
        blocks.D = {*block_values[9], *block_values[10], *block_values[11]};
        check_dimensions(blocks);
        out.blocks = std::move(blocks);
    }
    return out;
}

ModelFile parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return parse_model(in);
}

std::string format_double(double value) {
    char buffer[40];
    if (value == static_cast<long long>(value) && std::abs(value) < 1e15) {
        std::snprintf(buffer, sizeof(buffer), "%lld", static_cast<long long>(value));
        return buffer;
    }
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    // prefer the shortest representation that round-trips
    for (int precision = 1; precision < 17; ++precision) {
        char candidate[40];
        std::snprintf(candidate, sizeof(candidate), "%.*g", precision, value);
        double parsed = 0.0;
        std::sscanf(candidate, "%lf", &parsed);
        if (parsed == value) return candidate;
    }
    return buffer;
}

std::string write_model(const ModelFile& model) {
    std::ostringstream oss;
    const GraphFamily& fam = model.family;
    oss << "n " << fam.graphs.front().n_vertices << "\n";
    for (const Graph& g : fam.graphs) {
        oss << "graph\n";
        for (const Edge& e : g.edges) {
            oss << "e " << e.u << " " << e.v << "\n";
        }
    }
    oss << "bounds " << format_double(fam.lambda_lo) << " " << format_double(fam.lambda_hi)
        << "\n";
    if (model.blocks) {
        const DecomposableMatrices& b = *model.blocks;
        oss << "blocks " << b.n_x() << " " << b.n_w() << " " << b.n_z() << "\n";
        const Eigen::MatrixXd* mats[12] = {&b.A.d, &b.A.c, &b.A.p, &b.B.d, &b.B.c, &b.B.p,
                                           &b.C.d, &b.C.c, &b.C.p, &b.D.d, &b.D.c, &b.D.p};
        static const char* kBlockNames[12] = {"Ad", "Ac", "Ap", "Bd", "Bc", "Bp",
                                              "Cd", "Cc", "Cp", "Dd", "Dc", "Dp"};
        for (int i = 0; i < 12; ++i) {
            oss << kBlockNames[i];
            for (Eigen::Index r = 0; r < mats[i]->rows(); ++r) {
                for (Eigen::Index c = 0; c < mats[i]->cols(); ++c) {
                    oss << " " << format_double((*mats[i])(r, c));
                }
            }
            oss << "\n";
        }
    }
    return oss.str();
}

}  // namespace swmas
