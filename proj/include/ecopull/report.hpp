#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ecopull {

/// `%.9g`; NaN prints as "nan".
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);  // empty when unset

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> cells);
    void write(std::ostream& os) const;
    std::string str() const;

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 400;
};

/// Plain SVG line chart with axes, ticks and a legend.
void write_svg_chart(std::ostream& os, const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace ecopull
