#include <uqlab/harness/svg.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace uqlab::harness::svg
{
	namespace
	{
		constexpr double panel_width = 320.0;
		constexpr double panel_height = 260.0;
		constexpr double margin = 40.0;
		const char *const palette[] = { "#1f77b4", "#d62728", "#2ca02c", "#9467bd" };

		std::string num(double v)
		{
			char buffer[32];
			std::snprintf(buffer, sizeof(buffer), "%.2f", v);
			return buffer;
		}

		std::string escape(const std::string &text)
		{
			std::string out;
			for (char c : text)
			{
				if (c == '<')
					out += "&lt;";
				else if (c == '>')
					out += "&gt;";
				else if (c == '&')
					out += "&amp;";
				else
					out += c;
			}
			return out;
		}

		// Plot area of one panel, mapping data coordinates (x in [x0, x1], y in [y0, y1]) to pixels.
		struct Panel
		{
				double left, top, width, height;
				double x0, x1, y0, y1;

				double px(double x) const
				{
					return left + (x - x0) / (x1 - x0) * width;
				}
				double py(double y) const
				{
					return top + height - (y - y0) / (y1 - y0) * height;
				}
		};

		class Canvas
		{
			public:
				Canvas(double width, double height) :
						m_width(width), m_height(height)
				{
				}

				void line(double x1, double y1, double x2, double y2, const char *stroke, double stroke_width = 1.0, bool dashed = false)
				{
					m_body << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\""
							<< stroke << "\" stroke-width=\"" << num(stroke_width) << "\"" << (dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
				}
				void rect(double x, double y, double w, double h, const char *fill, double opacity = 1.0)
				{
					m_body << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.0, w)) << "\" height=\""
							<< num(std::max(0.0, h)) << "\" fill=\"" << fill << "\" fill-opacity=\"" << num(opacity) << "\" stroke=\"#333333\" stroke-width=\"0.50\"/>\n";
				}
				void polyline(const std::vector<std::pair<double, double>> &points, const char *stroke)
				{
					if (points.empty())
						return;
					m_body << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.50\" points=\"";
					for (std::size_t i = 0; i < points.size(); i++)
						m_body << (i ? " " : "") << num(points[i].first) << ',' << num(points[i].second);
					m_body << "\"/>\n";
				}
				void text(double x, double y, const std::string &content, double size = 11.0, const char *anchor = "middle")
				{
					m_body << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << num(size)
							<< "\" text-anchor=\"" << anchor << "\">" << escape(content) << "</text>\n";
				}
				void axes(const Panel &p, const std::string &title, const std::string &x_label, const std::string &y_label)
				{
					line(p.left, p.top + p.height, p.left + p.width, p.top + p.height, "#000000");
					line(p.left, p.top, p.left, p.top + p.height, "#000000");
					text(p.left + p.width / 2, p.top - 8, title, 12);
					text(p.left + p.width / 2, p.top + p.height + 30, x_label);
					text(p.left - 28, p.top + p.height / 2, y_label, 11, "middle");
					for (int i = 0; i <= 4; i++)
					{
						const double fx = p.x0 + (p.x1 - p.x0) * i / 4.0;
						const double fy = p.y0 + (p.y1 - p.y0) * i / 4.0;
						text(p.px(fx), p.top + p.height + 14, num(fx), 9);
						text(p.left - 4, p.py(fy) + 3, num(fy), 9, "end");
					}
				}
				std::string str() const
				{
					std::ostringstream out;
					out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(m_width) << "\" height=\"" << num(m_height) << "\" viewBox=\"0 0 "
							<< num(m_width) << ' ' << num(m_height) << "\">\n";
					out << "<rect x=\"0\" y=\"0\" width=\"" << num(m_width) << "\" height=\"" << num(m_height) << "\" fill=\"#ffffff\"/>\n";
					out << m_body.str() << "</svg>\n";
					return out.str();
				}

			private:
				double m_width, m_height;
				std::ostringstream m_body;
		};

		Panel panel_at(std::size_t index, double x0, double x1, double y0, double y1)
		{
			const double left = static_cast<double>(index) * (panel_width + margin) + margin + 20;
			return Panel { left, margin, panel_width, panel_height - 2 * margin, x0, x1, y0, y1 };
		}

		double canvas_width(std::size_t panels)
		{
			return static_cast<double>(std::max<std::size_t>(panels, 1)) * (panel_width + margin) + margin + 20;
		}
	}

	std::string reliability_diagram(std::span<const MethodReport> methods)
	{
		Canvas canvas(canvas_width(methods.size()), panel_height + 20);
		for (std::size_t i = 0; i < methods.size(); i++)
		{
			const auto &m = methods[i];
			const Panel p = panel_at(i, 0.0, 1.0, 0.0, 1.0);
			canvas.axes(p, to_string(m.method) + "  ECE " + num(m.ece.percent()) + "%", "confidence", "accuracy");
			canvas.line(p.px(0), p.py(0), p.px(1), p.py(1), "#888888", 1.0, true);
			for (const auto &bin : m.ece.bins.bins)
			{
				if (bin.count == 0)
					continue;
				const double x = p.px(bin.lower), w = p.px(bin.upper) - x;
				canvas.rect(x, p.py(bin.accuracy), w, p.py(0) - p.py(bin.accuracy), palette[0], 0.8);
			}
		}
		return canvas.str();
	}

	std::string entropy_histograms(std::span<const MethodReport> methods)
	{
		Canvas canvas(canvas_width(methods.size()), panel_height + 20);
		for (std::size_t i = 0; i < methods.size(); i++)
		{
			const auto &m = methods[i];
			const auto &h = m.histograms;
			// densities so the two groups are comparable despite different sizes
			auto density = [&](const metrics::Histogram &g, std::size_t b)
			{	return g.total ? static_cast<double>(g.counts[b]) / static_cast<double>(g.total) : 0.0;};
			double peak = 0.0;
			for (std::size_t b = 0; b < h.correct.counts.size(); b++)
				peak = std::max( { peak, density(h.correct, b), density(h.incorrect, b) });
			const Panel p = panel_at(i, h.lower, h.upper, 0.0, peak > 0 ? peak : 1.0);
			canvas.axes(p, to_string(m.method) + "  correct (blue) vs misclassified (red)", "predictive entropy", "fraction");
			const std::size_t bins = h.correct.counts.size();
			const double width = (h.upper - h.lower) / static_cast<double>(bins);
			for (std::size_t b = 0; b < bins; b++)
			{
				const double x = p.px(h.lower + width * static_cast<double>(b)), w = p.px(h.lower + width * static_cast<double>(b + 1)) - x;
				canvas.rect(x, p.py(density(h.correct, b)), w, p.py(0) - p.py(density(h.correct, b)), palette[0], 0.5);
				canvas.rect(x, p.py(density(h.incorrect, b)), w, p.py(0) - p.py(density(h.incorrect, b)), palette[1], 0.5);
			}
		}
		return canvas.str();
	}

	std::string threshold_sweep(std::span<const MethodReport> methods)
	{
		Canvas canvas(canvas_width(methods.size()), panel_height + 40);
		const char *names[] = { "USen", "USpe", "UPre", "UAcc" };
		for (std::size_t i = 0; i < methods.size(); i++)
		{
			const auto &m = methods[i];
			if (m.sweep.empty())
				continue;
			const Panel p = panel_at(i, m.sweep.front().threshold, std::max(m.sweep.back().threshold, m.sweep.front().threshold + 1e-9), 0.0, 1.0);
			canvas.axes(p, to_string(m.method), "threshold", "value");
			for (int k = 0; k < 4; k++)
			{
				std::vector<std::pair<double, double>> points;
				for (const auto &row : m.sweep)
				{
					const std::optional<double> v[] = { row.metrics.usen, row.metrics.uspe, row.metrics.upre, row.metrics.uacc };
					if (v[k])
						points.emplace_back(p.px(row.threshold), p.py(*v[k]));
				}
				canvas.polyline(points, palette[k]);
				canvas.text(p.left + 40 + 70 * k, p.top + p.height + 48, names[k], 10);
				canvas.line(p.left + 10 + 70 * k, p.top + p.height + 44, p.left + 24 + 70 * k, p.top + p.height + 44, palette[k], 2.0);
			}
		}
		return canvas.str();
	}

	std::string base_model_boxplot(const BaseStudy &study)
	{
		std::vector<std::pair<std::string, metrics::SummaryStats>> boxes { { "accuracy", study.accuracy } };
		if (study.sensitivity)
			boxes.emplace_back("sensitivity", *study.sensitivity);
		if (study.specificity)
			boxes.emplace_back("specificity", *study.specificity);
		if (study.auc)
			boxes.emplace_back("AUC", *study.auc);

		double lo = 1.0, hi = 0.0;
		for (const auto &[name, s] : boxes)
		{
			lo = std::min(lo, s.min);
			hi = std::max(hi, s.max);
		}
		lo = std::max(0.0, lo - 0.05);
		hi = std::min(1.0, hi + 0.05);
		if (hi <= lo)
			hi = lo + 0.1;

		Canvas canvas(2 * panel_width, panel_height + 20);
		const Panel p { margin + 20, margin, 2 * panel_width - 2 * margin - 20, panel_height - 2 * margin, 0.0, static_cast<double>(boxes.size()), lo, hi };
		canvas.axes(p, "base model over " + std::to_string(study.runs.size()) + " runs", "", "value");
		for (std::size_t i = 0; i < boxes.size(); i++)
		{
			const auto &[name, s] = boxes[i];
			const double cx = p.px(static_cast<double>(i) + 0.5), half = 18.0;
			canvas.line(cx, p.py(s.min), cx, p.py(s.q1), "#000000");
			canvas.line(cx, p.py(s.q3), cx, p.py(s.max), "#000000");
			canvas.line(cx - half / 2, p.py(s.min), cx + half / 2, p.py(s.min), "#000000");
			canvas.line(cx - half / 2, p.py(s.max), cx + half / 2, p.py(s.max), "#000000");
			canvas.rect(cx - half, p.py(s.q3), 2 * half, p.py(s.q1) - p.py(s.q3), palette[i % 4], 0.6);
			canvas.line(cx - half, p.py(s.median), cx + half, p.py(s.median), "#000000", 2.0);
			canvas.text(cx, p.top + p.height + 30, name, 10);
		}
		return canvas.str();
	}
}
