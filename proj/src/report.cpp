#include "sama/report.hpp"

#include <json.hpp>
#include <sstream>

#include "sama/io.hpp"

namespace sama {

using nlohmann::json;

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::filesystem::create_directories(dir);
    json j;
    j["version"] = 1;
    j["seed"] = report.seed;
    j["pairs"] = report.pairs;
    j["w_t"] = report.w_t;
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        json row;
        row["w_s"] = r.w_s;
        row["toy_fid"] = r.toy_fid;
        row["fid_regularized"] = r.fid_regularized;
        row["label_accuracy"] = r.label_accuracy;
        row["cfr_mean"] = r.cfr_mean;
        row["cfr_std"] = r.cfr_std;
        row["mmp_mean"] = r.mmp_mean;
        row["mmp_std"] = r.mmp_std;
        row["jcr_mean"] = r.jcr_mean;
        row["jcr_std"] = r.jcr_std;
        row["foot_skating"] = r.foot_skating;
        row["skating_ratio"] = r.skating_ratio;
        row["mjpe_mean"] = r.mjpe_mean;
        j["rows"].push_back(row);
    }
    write_text_file(dir / "report.json", j.dump(2) + "\n");

    std::ostringstream txt;
    txt << "# evaluation report (pairs=" << report.pairs << ", w_t=" << report.w_t << ")\n";
    txt << "w_s      toy_fid  label_acc  cfr      mmp      jcr      f_skate  sk_ratio\n";
    char buf[160];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-8.2f %-8.4f %-10.4f %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f\n",
                      r.w_s, r.toy_fid, r.label_accuracy, r.cfr_mean, r.mmp_mean, r.jcr_mean,
                      r.foot_skating, r.skating_ratio);
        txt << buf;
    }
    write_text_file(dir / "report.txt", txt.str());

    std::vector<double> xs, cfr, fid;
    for (const auto& r : report.rows) {
        xs.push_back(r.w_s);
        cfr.push_back(r.cfr_mean);
        fid.push_back(r.toy_fid);
    }
    svg_line_chart(dir / "cfr_vs_ws.svg", "collision-frame ratio vs scene guidance", "w_s",
                   "CFR", xs, cfr);
    svg_line_chart(dir / "toyfid_vs_ws.svg", "toy-FID vs scene guidance", "w_s", "toy-FID", xs,
                   fid);
}

EvalReport load_report(const std::filesystem::path& json_path) {
    json j = json::parse(read_text_file(json_path));
    EvalReport r;
    r.seed = j.value("seed", 0ull);
    r.pairs = j.value("pairs", 0);
    r.w_t = j.value("w_t", 2.5);
    for (const auto& row : j.at("rows")) {
        SweepRow s;
        s.w_s = row.value("w_s", 0.0);
        s.toy_fid = row.value("toy_fid", 0.0);
        s.fid_regularized = row.value("fid_regularized", false);
        s.label_accuracy = row.value("label_accuracy", 0.0);
        s.cfr_mean = row.value("cfr_mean", 0.0);
        s.cfr_std = row.value("cfr_std", 0.0);
        s.mmp_mean = row.value("mmp_mean", 0.0);
        s.mmp_std = row.value("mmp_std", 0.0);
        s.jcr_mean = row.value("jcr_mean", 0.0);
        s.jcr_std = row.value("jcr_std", 0.0);
        s.foot_skating = row.value("foot_skating", 0.0);
        s.skating_ratio = row.value("skating_ratio", 0.0);
        s.mjpe_mean = row.value("mjpe_mean", -1.0);
        r.rows.push_back(s);
    }
    return r;
}

void svg_line_chart(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw InvalidInputError("svg_line_chart: xs/ys must be equal-sized and non-empty");
    const int W = 520, H = 360, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
    for (size_t i = 0; i < xs.size(); ++i) {
        xmin = std::min(xmin, xs[i]);
        xmax = std::max(xmax, xs[i]);
        ymin = std::min(ymin, ys[i]);
        ymax = std::max(ymax, ys[i]);
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    double ypad = 0.08 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    // axes
    s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
    char buf[64];
    for (int k = 0; k <= 4; ++k) {
        double xv = xmin + (xmax - xmin) * k / 4.0;
        double yv = ymin + (ymax - ymin) * k / 4.0;
        std::snprintf(buf, sizeof(buf), "%.2f", xv);
        s << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" font-size=\"11\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.3f", yv);
        s << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
    }
    s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    s << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + H - mb) / 2 << ")\">" << y_label << "</text>\n";
    s << "<polyline fill=\"none\" stroke=\"#1565c0\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) s << px(xs[i]) << "," << py(ys[i]) << " ";
    s << "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        s << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i])
          << "\" r=\"3.5\" fill=\"#1565c0\"/>\n";
    s << "</svg>\n";
    write_text_file(path, s.str());
}

}  // namespace sama
