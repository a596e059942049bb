#include "stylo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>

#include "stylo/error.hpp"

namespace stylo {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kHumanColor = "#1f77b4";
constexpr const char* kGeneratedColor = "#d62728";
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                     num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
                     "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
    return s;
}

std::string axes(double x0, double x1, double y0, double y1, const std::string& xlabel, const std::string& ylabel) {
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    std::string s;
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(kTop + ph) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop + ph) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = kLeft + pw * i / 4.0, fy = kTop + ph - ph * i / 4.0;
        s += "<text x=\"" + num(fx) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
             tick(x0 + (x1 - x0) * i / 4.0) + "</text>\n";
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(fy + 4) + "\" text-anchor=\"end\">" +
             tick(y0 + (y1 - y0) * i / 4.0) + "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
         escape(xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s;
}

std::string legend_entry(std::size_t i, const std::string& label, const char* color) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(i);
    const double x = kWidth - kRight - 150;
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"12\" height=\"10\" fill=\"" + color +
           "\" fill-opacity=\"0.6\"/>\n<text x=\"" + num(x + 18) + "\" y=\"" + num(y) + "\">" + escape(label) +
           "</text>\n";
}

}  // namespace

std::string histogram_svg(const std::string& feature, std::span<const double> human,
                          std::span<const double> generated, std::size_t bins) {
    if (bins == 0) throw ValidationError("histogram: bins must be positive");
    if (human.empty() && generated.empty()) throw ValidationError("histogram: no values for " + feature);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto side : {human, generated}) {
        for (double v : side) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    auto histogram = [&](std::span<const double> xs) {
        std::vector<double> h(bins, 0.0);
        for (double v : xs) {
            auto b = static_cast<std::size_t>((v - lo) / width);
            h[std::min(b, bins - 1)] += 1.0;
        }
        // normalize to proportions so unequal class sizes compare
        for (double& c : h) c = xs.empty() ? 0.0 : c / static_cast<double>(xs.size());
        return h;
    };
    const auto hh = histogram(human), hg = histogram(generated);
    double top = 0.0;
    for (std::size_t b = 0; b < bins; ++b) top = std::max({top, hh[b], hg[b]});
    if (top <= 0.0) top = 1.0;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    std::string s = header(feature);
    s += axes(lo, hi, 0.0, top, feature, "proportion of documents");
    const double bw = pw / static_cast<double>(bins);
    for (int side = 0; side < 2; ++side) {
        const auto& h = side == 0 ? hh : hg;
        const char* color = side == 0 ? kHumanColor : kGeneratedColor;
        s += "<g fill=\"" + std::string(color) + "\" fill-opacity=\"0.45\">\n";
        for (std::size_t b = 0; b < bins; ++b) {
            if (h[b] <= 0.0) continue;
            const double bh = ph * h[b] / top;
            s += "<rect x=\"" + num(kLeft + bw * static_cast<double>(b)) + "\" y=\"" + num(kTop + ph - bh) +
                 "\" width=\"" + num(bw) + "\" height=\"" + num(bh) + "\"/>\n";
        }
        s += "</g>\n";
    }
    s += legend_entry(0, "human (n=" + std::to_string(human.size()) + ")", kHumanColor);
    s += legend_entry(1, "generated (n=" + std::to_string(generated.size()) + ")", kGeneratedColor);
    s += "</svg>\n";
    return s;
}

std::string roc_svg(const std::vector<std::pair<std::string, std::vector<RocPoint>>>& curves,
                    const std::string& title) {
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    std::string s = header(title);
    s += axes(0.0, 1.0, 0.0, 1.0, "false positive rate", "true positive rate");
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(kTop) + "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (const auto& p : curves[i].second) {
            pts += num(kLeft + pw * p.fpr) + "," + num(kTop + ph - ph * p.tpr) + " ";
        }
        if (!pts.empty()) pts.pop_back();
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
             "\"/>\n";
        s += legend_entry(i, curves[i].first, color);
    }
    s += "</svg>\n";
    return s;
}

}  // namespace stylo
