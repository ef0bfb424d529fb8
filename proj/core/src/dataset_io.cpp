#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "bargrain/errors.hpp"
#include "bargrain/preprocess.hpp"

namespace fs = std::filesystem;

namespace bargrain {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::string where(const fs::path& file, std::size_t line_no) {
    return file.string() + ":" + std::to_string(line_no);
}

double parse_double(std::string_view field, const fs::path& file, std::size_t line_no, std::size_t col) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw LoadError(where(file, line_no) + ": column " + std::to_string(col + 1) + ": cannot parse '" +
                        std::string(field) + "' as a number");
    }
    return v;
}

std::map<std::string, Label> read_labels(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw LoadError("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "subject_id,label") {
        throw LoadError(where(file, 1) + ": expected header 'subject_id,label'");
    }
    std::map<std::string, Label> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = strip_cr(line);
        if (row.empty()) continue;
        const auto fields = split_commas(row);
        if (fields.size() != 2 || fields[0].empty()) {
            throw LoadError(where(file, line_no) + ": expected 'subject_id,label'");
        }
        Label label;
        if (fields[1] == "0") {
            label = Label::control;
        } else if (fields[1] == "1") {
            label = Label::disease;
        } else {
            throw LoadError(where(file, line_no) + ": label must be 0 or 1, got '" + std::string(fields[1]) + "'");
        }
        if (!labels.emplace(std::string(fields[0]), label).second) {
            throw LoadError(where(file, line_no) + ": duplicate subject '" + std::string(fields[0]) + "'");
        }
    }
    if (labels.empty()) throw LoadError(file.string() + ": no subjects listed");
    return labels;
}

Matrix read_series(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw LoadError("missing series file " + file.string());
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = strip_cr(line);
        if (row.empty()) continue;
        const auto fields = split_commas(row);
        if (rows == 0) {
            cols = fields.size();
        } else if (fields.size() != cols) {
            throw LoadError(where(file, line_no) + ": row has " + std::to_string(fields.size()) +
                            " columns, expected " + std::to_string(cols));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) values.push_back(parse_double(fields[c], file, line_no, c));
        ++rows;
    }
    if (rows == 0) throw LoadError(file.string() + ": empty series file");
    return Matrix(rows, cols, std::move(values));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw LoadError("dataset directory not found: " + dir.string());
    const auto labels = read_labels(dir / "labels.csv");

    Dataset ds;
    ds.name = dir.filename().string();
    if (ds.name.empty()) ds.name = dir.parent_path().filename().string();
    for (const auto& [id, label] : labels) {  // std::map iterates in lexicographic id order
        const fs::path file = dir / (id + ".csv");
        BoldMatrix subject{id, read_series(file), label};
        if (!ds.subjects.empty()) {
            const auto& first = ds.subjects.front();
            if (subject.n_rois() != first.n_rois() || subject.t_steps() != first.t_steps()) {
                throw LoadError(file.string() + ": shape " + shape_string(subject.n_rois(), subject.t_steps()) +
                                " differs from " + shape_string(first.n_rois(), first.t_steps()) + " of '" +
                                first.subject_id + "'");
            }
        }
        try {
            subject.validate();
        } catch (const ValidationError& e) {
            throw LoadError(file.string() + ": " + e.what());
        }
        ds.subjects.push_back(std::move(subject));
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<const BoldMatrix*> sorted;
    for (const auto& s : dataset.subjects) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const BoldMatrix* a, const BoldMatrix* b) { return a->subject_id < b->subject_id; });

    std::ofstream labels(dir / "labels.csv", std::ios::binary);
    if (!labels) throw LoadError("cannot write " + (dir / "labels.csv").string());
    labels << "subject_id,label\n";
    for (const BoldMatrix* s : sorted) {
        labels << s->subject_id << ',' << static_cast<int>(s->label) << '\n';

        const fs::path file = dir / (s->subject_id + ".csv");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw LoadError("cannot write " + file.string());
        std::string line;
        for (std::size_t i = 0; i < s->series.rows(); ++i) {
            line.clear();
            for (std::size_t t = 0; t < s->series.cols(); ++t) {
                if (t) line += ',';
                line += format_double(s->series(i, t));
            }
            line += '\n';
            out << line;
        }
    }
}

}  // namespace bargrain
