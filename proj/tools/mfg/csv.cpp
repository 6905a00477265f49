#include "mfg/csv.hpp"

#include <fstream>
#include <stdexcept>

#include "mfg/config.hpp"

namespace mfg::cli {

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<const std::vector<double>*>& columns) {
    if (header.size() != columns.size()) throw std::invalid_argument("csv: header/column mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
    for (const auto* c : columns) {
        if (c->size() != rows) throw std::invalid_argument("csv: ragged columns");
    }
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            out += format_double((*columns[i])[r]);
        }
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const std::vector<std::string>& names,
                           const std::vector<const Trajectory*>& series) {
    if (series.empty()) throw std::invalid_argument("trajectory_csv: no series");
    const auto& grid = series.front()->grid();
    std::vector<double> t(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) t[k] = grid.node(k);
    std::vector<std::string> header{"t"};
    std::vector<const std::vector<double>*> cols{&t};
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i]->grid() == grid)) throw std::invalid_argument("trajectory_csv: grid mismatch");
        header.push_back(names.at(i));
        cols.push_back(&series[i]->values());
    }
    return csv_text(header, cols);
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

}  // namespace mfg::cli
