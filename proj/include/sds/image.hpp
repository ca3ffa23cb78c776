#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <png.h>

#include "sds/errors.hpp"

namespace sds {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

namespace color {
inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb black{0, 0, 0};
inline constexpr Rgb red{220, 40, 40};
inline constexpr Rgb green{40, 160, 60};
inline constexpr Rgb blue{40, 80, 220};
inline constexpr Rgb gray{150, 150, 150};
inline constexpr Rgb light_gray{225, 225, 225};
inline constexpr Rgb orange{235, 140, 30};
}  // namespace color

namespace detail {

// 5x7 bitmap glyphs, one byte per row, low 5 bits used. Lowercase input is
// folded to uppercase; unknown characters render as blanks.
inline const std::uint8_t* glyph5x7(char c) {
    static const std::uint8_t digits[10][7] = {
        {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
        {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
        {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
        {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
        {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
    static const std::uint8_t letters[26][7] = {
        {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
        {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},
        {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
        {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
        {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
        {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
        {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11},
        {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
        {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
        {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
        {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
        {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
        {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}};
    static const std::uint8_t dot[7] = {0, 0, 0, 0, 0, 0x0C, 0x0C};
    static const std::uint8_t comma[7] = {0, 0, 0, 0, 0x0C, 0x04, 0x08};
    static const std::uint8_t minus[7] = {0, 0, 0, 0x1F, 0, 0, 0};
    static const std::uint8_t plus[7] = {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0};
    static const std::uint8_t percent[7] = {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13};
    static const std::uint8_t colon[7] = {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0};
    static const std::uint8_t equals[7] = {0, 0, 0x1F, 0, 0x1F, 0, 0};
    static const std::uint8_t slash[7] = {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10};
    static const std::uint8_t lparen[7] = {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02};
    static const std::uint8_t rparen[7] = {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08};
    static const std::uint8_t blank[7] = {0, 0, 0, 0, 0, 0, 0};

    if (c >= '0' && c <= '9') return digits[c - '0'];
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c >= 'A' && c <= 'Z') return letters[c - 'A'];
    switch (c) {
        case '.': return dot;
        case ',': return comma;
        case '-': return minus;
        case '+': return plus;
        case '%': return percent;
        case ':': return colon;
        case '=': return equals;
        case '/': return slash;
        case '(': return lparen;
        case ')': return rparen;
        default: return blank;
    }
}

}  // namespace detail

/// 8-bit RGB raster with just enough drawing for grids, overlays, and plots.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = color::white)
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3) {
        require(width > 0 && height > 0, Errc::InvalidInput, "image dimensions must be positive");
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = fill.r;
            data_[i + 1] = fill.g;
            data_[i + 2] = fill.b;
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    const std::vector<std::uint8_t>& bytes() const { return data_; }

    bool operator==(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

    Rgb at(int x, int y) const {
        const std::size_t i = idx(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        const std::size_t i = idx(x, y);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    void fill_rect(int x, int y, int w, int h, Rgb c) {
        for (int yy = std::max(0, y); yy < std::min(height_, y + h); ++yy)
            for (int xx = std::max(0, x); xx < std::min(width_, x + w); ++xx)
                set(xx, yy, c);
    }

    void draw_line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1) {
        int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        for (;;) {
            if (thickness <= 1) {
                set(x0, y0, c);
            } else {
                const int r = thickness / 2;
                fill_rect(x0 - r, y0 - r, thickness, thickness, c);
            }
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }

    void draw_disc(int cx, int cy, int radius, Rgb c) {
        for (int y = -radius; y <= radius; ++y)
            for (int x = -radius; x <= radius; ++x)
                if (x * x + y * y <= radius * radius) set(cx + x, cy + y, c);
    }

    void draw_text(int x, int y, const std::string& text, Rgb c, int scale = 1) {
        int cx = x;
        for (char ch : text) {
            const std::uint8_t* rows = detail::glyph5x7(ch);
            for (int ry = 0; ry < 7; ++ry)
                for (int rx = 0; rx < 5; ++rx)
                    if (rows[ry] & (1 << (4 - rx)))
                        fill_rect(cx + rx * scale, y + ry * scale, scale, scale, c);
            cx += 6 * scale;
        }
    }

    void blit(const Image& src, int x, int y) {
        for (int sy = 0; sy < src.height_; ++sy) {
            const int dy = y + sy;
            if (dy < 0 || dy >= height_) continue;
            const int copy_w = std::min(src.width_, width_ - x);
            if (copy_w <= 0) continue;
            std::memcpy(&data_[idx(x, dy)], &src.data_[src.idx(0, sy)],
                        static_cast<std::size_t>(copy_w) * 3);
        }
    }

    Image crop(int x, int y, int w, int h) const {
        require(x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width_ && y + h <= height_,
                Errc::InvalidInput, "crop region out of bounds");
        Image out(w, h);
        for (int sy = 0; sy < h; ++sy)
            std::memcpy(&out.data_[out.idx(0, sy)], &data_[idx(x, y + sy)],
                        static_cast<std::size_t>(w) * 3);
        return out;
    }

    static Image load_png(const std::string& path) {
        png_image png{};
        png.version = PNG_IMAGE_VERSION;
        if (!png_image_begin_read_from_file(&png, path.c_str()))
            fail(Errc::IoError, "cannot read PNG " + path + ": " + png.message);
        png.format = PNG_FORMAT_RGB;
        Image out(static_cast<int>(png.width), static_cast<int>(png.height));
        if (!png_image_finish_read(&png, nullptr, out.data_.data(), 0, nullptr))
            fail(Errc::IoError, "cannot decode PNG " + path + ": " + png.message);
        return out;
    }

    void save_png(const std::string& path) const {
        require(!empty(), Errc::InvalidInput, "cannot save empty image");
        png_image png{};
        png.version = PNG_IMAGE_VERSION;
        png.width = static_cast<png_uint_32>(width_);
        png.height = static_cast<png_uint_32>(height_);
        png.format = PNG_FORMAT_RGB;
        if (!png_image_write_to_file(&png, path.c_str(), 0, data_.data(), 0, nullptr))
            fail(Errc::IoError, "cannot write PNG " + path + ": " + png.message);
    }

private:
    std::size_t idx(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

}  // namespace sds
