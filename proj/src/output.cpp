#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <sstream>
#include <thread>

#include "relaybuf/experiments.hpp"

namespace relaybuf {

unsigned thread_pool_size() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("RELAYBUF_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0 && cap < 4096)
            hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return std::max(1u, hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_pool_size(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

namespace {

// Compact SHA-1 (FIPS 180-1), enough for content-addressing CSV blocks.
struct Sha1 {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                          0xC3D2E1F0u};
    std::uint64_t total = 0;
    unsigned char block[64];
    std::size_t fill = 0;

    static std::uint32_t rol(std::uint32_t x, int n) {
        return (x << n) | (x >> (32 - n));
    }

    void process(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) { f = (b & c) | (~b & d); k = 0x5A827999u; }
            else if (i < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1u; }
            else if (i < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDCu; }
            else { f = b ^ c ^ d; k = 0xCA62C1D6u; }
            const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d; d = c; c = rol(b, 30); b = a; a = t;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
    }

    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total += len;
        while (len > 0) {
            const std::size_t take = std::min<std::size_t>(64 - fill, len);
            std::memcpy(block + fill, p, take);
            fill += take; p += take; len -= take;
            if (fill == 64) { process(block); fill = 0; }
        }
    }

    std::string hex() {
        const std::uint64_t bits = total * 8;
        const unsigned char one = 0x80;
        update(&one, 1);
        const unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = (bits >> (56 - 8 * i)) & 0xFF;
        update(len, 8);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 40);
    }
};

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string git_blob_sha1(const std::string& content) {
    Sha1 s;
    char header[40];
    const int n =
        std::snprintf(header, sizeof header, "blob %zu", content.size());
    s.update(header, static_cast<std::size_t>(n) + 1);  // includes the NUL
    s.update(content.data(), content.size());
    return s.hex();
}

namespace {

std::string csv_data_block(const CurveTable& table) {
    std::ostringstream data;
    data << table.x_name;
    for (const std::string& label : table.labels) {
        data << ',' << label << "_analytic";
        if (table.with_sim) data << ',' << label << "_sim" << ',' << label << "_sim_se";
    }
    data << '\n';
    for (const CurveRow& row : table.rows) {
        data << format_number(row.x);
        for (const CurveCell& cell : row.cells) {
            data << ',';
            if (cell.has_analytic) data << format_number(cell.analytic);
            if (table.with_sim) {
                data << ',';
                if (cell.has_sim) data << format_number(cell.sim);
                data << ',';
                if (cell.has_sim) data << format_number(cell.sim_se);
            }
        }
        data << '\n';
    }
    return data.str();
}

}  // namespace

std::string curve_content_hash(const CurveTable& table) {
    return git_blob_sha1(csv_data_block(table));
}

std::string curve_to_csv(const CurveTable& table, bool reproducible) {
    const std::string block = csv_data_block(table);

    std::ostringstream out;
    out << "# relaybuf curve table\n";
    out << "# config: " << table.resolved_config << '\n';
    out << "# hash: " << git_blob_sha1(block) << '\n';
    if (!reproducible) {
        char stamp[64];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        out << "# generated: " << stamp << '\n';
    }
    out << block;
    return out.str();
}

namespace {

struct Extent {
    double lo = 0.0, hi = 1.0;
};

double map_linear(double v, Extent e, double px_lo, double px_hi) {
    if (e.hi == e.lo) return 0.5 * (px_lo + px_hi);
    return px_lo + (v - e.lo) / (e.hi - e.lo) * (px_hi - px_lo);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#e377c2",
                          "#7f7f7f", "#bcbd22", "#393b79", "#637939"};

}  // namespace

std::string curve_to_svg(const CurveTable& table, const std::string& title,
                         bool log_y) {
    const double width = 960, height = 600;
    const double ml = 80, mr = 220, mt = 50, mb = 60;

    Extent ex, ey;
    bool first = true;
    for (const CurveRow& row : table.rows) {
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            const CurveCell& cell = row.cells[c];
            for (int which = 0; which < 2; ++which) {
                const bool have = which == 0 ? cell.has_analytic : cell.has_sim;
                double v = which == 0 ? cell.analytic : cell.sim;
                if (!have || !std::isfinite(v)) continue;
                if (log_y) {
                    if (v <= 0.0) continue;
                    v = std::log10(v);
                }
                if (first) { ex = {row.x, row.x}; ey = {v, v}; first = false; }
                ex.lo = std::min(ex.lo, row.x); ex.hi = std::max(ex.hi, row.x);
                ey.lo = std::min(ey.lo, v); ey.hi = std::max(ey.hi, v);
            }
        }
    }
    if (first) { ex = {0, 1}; ey = {0, 1}; }
    if (ey.hi == ey.lo) { ey.lo -= 0.5; ey.hi += 0.5; }

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
      << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto px = [&](double x) { return map_linear(x, ex, ml, width - mr); };
    auto py = [&](double y) {
        return map_linear(log_y ? std::log10(y) : y, ey, height - mb, mt);
    };

    // axis ticks
    for (int i = 0; i <= 5; ++i) {
        const double xv = ex.lo + (ex.hi - ex.lo) * i / 5.0;
        const double xp = px(xv);
        s << "<line x1=\"" << xp << "\" y1=\"" << height - mb << "\" x2=\"" << xp
          << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << xp << "\" y=\"" << height - mb + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << format_number(xv) << "</text>\n";
        const double yv = ey.lo + (ey.hi - ey.lo) * i / 5.0;
        const double yp = map_linear(yv, ey, height - mb, mt);
        s << "<line x1=\"" << ml - 5 << "\" y1=\"" << yp << "\" x2=\"" << ml
          << "\" y2=\"" << yp << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << ml - 8 << "\" y=\"" << yp + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << (log_y ? "1e" + format_number(yv) : format_number(yv)) << "</text>\n";
    }
    s << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << table.x_name << "</text>\n";

    for (std::size_t c = 0; c < table.labels.size(); ++c) {
        const char* color = kPalette[c % (sizeof kPalette / sizeof *kPalette)];
        std::ostringstream line;
        bool any = false;
        for (const CurveRow& row : table.rows) {
            const CurveCell& cell = row.cells[c];
            if (!cell.has_analytic || !std::isfinite(cell.analytic)) continue;
            if (log_y && cell.analytic <= 0.0) continue;
            line << (any ? " " : "") << px(row.x) << ',' << py(cell.analytic);
            any = true;
        }
        if (any)
            s << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\""
              << color << "\" stroke-width=\"1.5\"/>\n";
        if (table.with_sim) {
            for (const CurveRow& row : table.rows) {
                const CurveCell& cell = row.cells[c];
                if (!cell.has_sim || !std::isfinite(cell.sim)) continue;
                if (log_y && cell.sim <= 0.0) continue;
                s << "<circle cx=\"" << px(row.x) << "\" cy=\"" << py(cell.sim)
                  << "\" r=\"3\" fill=\"none\" stroke=\"" << color << "\"/>\n";
            }
        }
        const double ly = mt + 18.0 * static_cast<double>(c) + 12;
        s << "<line x1=\"" << width - mr + 12 << "\" y1=\"" << ly << "\" x2=\""
          << width - mr + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
        s << "<text x=\"" << width - mr + 42 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << table.labels[c]
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace relaybuf
