#include "dcp/path_io.hpp"

#include "dcp/errors.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace dcp {

void write_path(std::ostream& out, const PathSample& path) {
    out << std::setprecision(17);
    out << path.n() << ' ' << path.h() << ' ' << path.dim() << ' '
        << (path.meta().model_id.empty() ? "unknown" : path.meta().model_id) << ' ' << path.meta().seed << '\n';
    for (std::int64_t i = 0; i <= path.n(); ++i) {
        out << i;
        for (int c = 0; c < path.dim(); ++c) out << ' ' << path.scalar(i, c);
        out << '\n';
    }
}

PathSample read_path(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("path file is empty");
    std::istringstream hs(header);
    std::int64_t n = 0;
    double h = 0.0;
    int d = 0;
    PathMeta meta;
    if (!(hs >> n >> h >> d >> meta.model_id >> meta.seed)) throw ConfigError("malformed path header: " + header);
    if (n < 1 || d < 1 || d > kMaxDim || !(h > 0.0)) throw ConfigError("invalid path header values: " + header);

    std::vector<double> states(static_cast<std::size_t>((n + 1) * d));
    for (std::int64_t i = 0; i <= n; ++i) {
        std::int64_t index = -1;
        if (!(in >> index) || index != i) throw ConfigError("path row " + std::to_string(i) + " missing or out of order");
        for (int c = 0; c < d; ++c) {
            if (!(in >> states[static_cast<std::size_t>(i * d + c)]))
                throw ConfigError("path row " + std::to_string(i) + " is truncated");
        }
    }
    return PathSample(n, h, d, std::move(states), std::move(meta));
}

void save_path(const std::string& file, const PathSample& path) {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open " + file + " for writing");
    write_path(out, path);
}

PathSample load_path(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file);
    return read_path(in);
}

void write_curve(std::ostream& out, const std::vector<double>& values) {
    out << std::setprecision(17);
    for (std::size_t k = 0; k < values.size(); ++k) out << k << ' ' << values[k] << '\n';
}

}  // namespace dcp
