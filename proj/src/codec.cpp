#include "noisent/codec.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "noisent/error.hpp"

namespace noisent {

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept {
    static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
        return ImageFormat::Png;
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        return ImageFormat::Jpeg;
    }
    return ImageFormat::Unknown;
}

namespace {

// ---------------------------------------------------------------- PNG

// libpng reports errors through longjmp. The helpers below keep only
// trivially destructible locals between setjmp and the libpng calls; all
// buffers are owned by the callers.

struct PngErrorSink {
    char message[256] = {};
};

void png_error_longjmp(png_structp png, png_const_charp message) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof(sink->message), "%s", message);
    png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

struct PngReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->bytes.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
    cursor->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

class PngReader {
public:
    explicit PngReader(std::span<const std::uint8_t> bytes) : cursor_{bytes} {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink_, png_error_longjmp, png_ignore_warning);
        if (png_ == nullptr) {
            throw std::runtime_error("png_create_read_struct failed");
        }
        info_ = png_create_info_struct(png_);
        if (info_ == nullptr) {
            png_destroy_read_struct(&png_, nullptr, nullptr);
            throw std::runtime_error("png_create_info_struct failed");
        }
        png_set_read_fn(png_, &cursor_, png_read_from_span);
    }
    ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;

    /// Reads the header and installs the RGB8 transforms. Returns false on libpng error.
    bool read_header(bool install_transforms) {
        if (setjmp(png_jmpbuf(png_))) {
            return false;
        }
        png_read_info(png_, info_);
        if (!install_transforms) {
            return true;
        }
        const int color_type = png_get_color_type(png_, info_);
        const int bit_depth = png_get_bit_depth(png_, info_);
        if (color_type == PNG_COLOR_TYPE_PALETTE) {
            png_set_palette_to_rgb(png_);
        }
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png_);
        }
        if (bit_depth == 16) {
            png_set_strip_16(png_);
        }
        if (png_get_valid(png_, info_, PNG_INFO_tRNS)) {
            // tRNS expands into an alpha channel, which is then dropped like any alpha.
            png_set_tRNS_to_alpha(png_);
        }
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
            png_set_gray_to_rgb(png_);
        }
        png_set_strip_alpha(png_);
        png_set_interlace_handling(png_);
        png_read_update_info(png_, info_);
        return true;
    }

    bool read_rows(png_bytepp rows) {
        if (setjmp(png_jmpbuf(png_))) {
            return false;
        }
        png_read_image(png_, rows);
        return true;
    }

    int width() const { return static_cast<int>(png_get_image_width(png_, info_)); }
    int height() const { return static_cast<int>(png_get_image_height(png_, info_)); }
    std::size_t rowbytes() const { return png_get_rowbytes(png_, info_); }
    const char* error() const { return sink_.message; }

private:
    PngErrorSink sink_;
    PngReadCursor cursor_;
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

ImageU8 decode_png(std::span<const std::uint8_t> bytes) {
    PngReader reader(bytes);
    if (!reader.read_header(true)) {
        throw FormatError(std::string("PNG: ") + reader.error());
    }
    const int width = reader.width();
    const int height = reader.height();
    if (width <= 0 || height <= 0) {
        throw FormatError("PNG: zero-dimension image");
    }
    const std::size_t rowbytes = reader.rowbytes();
    if (rowbytes != static_cast<std::size_t>(width) * 3) {
        throw FormatError("PNG: unexpected row layout after transforms");
    }
    std::vector<std::uint8_t> interleaved(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = interleaved.data() + y * rowbytes;
    }
    if (!reader.read_rows(rows.data())) {
        throw FormatError(std::string("PNG: ") + reader.error());
    }

    ImageU8 img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::uint8_t* px = interleaved.data() + y * rowbytes + x * 3;
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = px[c];
            }
        }
    }
    return img;
}

ImageInfo probe_png(std::span<const std::uint8_t> bytes) {
    PngReader reader(bytes);
    if (!reader.read_header(false)) {
        throw FormatError(std::string("PNG: ") + reader.error());
    }
    return {ImageFormat::Png, reader.width(), reader.height()};
}

bool png_write_rows(png_structp png, png_infop info, int width, int height, int color_type,
                    png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    return true;
}

Bytes write_png(int width, int height, int color_type, int bytes_per_pixel,
                std::span<const std::uint8_t> interleaved) {
    PngErrorSink sink;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_longjmp, png_ignore_warning);
    if (png == nullptr) {
        throw std::runtime_error("png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    Bytes out;
    const std::size_t stride = static_cast<std::size_t>(width) * bytes_per_pixel;
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(interleaved.data() + y * stride);
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    const bool ok = png_write_rows(png, info, width, height, color_type, rows.data());
    png_destroy_write_struct(&png, &info);
    if (!ok) {
        throw FormatError(std::string("PNG encode: ") + sink.message);
    }
    return out;
}

// ---------------------------------------------------------------- JPEG

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit_longjmp(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void jpeg_silent_output(j_common_ptr) {}

// libjpeg reports errors through longjmp; every function below keeps only
// trivially destructible locals between setjmp and the libjpeg calls.

bool jpeg_decode_raw(std::span<const std::uint8_t> bytes, int& width, int& height, std::vector<std::uint8_t>& rgb,
                     bool header_only, std::string& error) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager jerr{};
    cinfo.err = jpeg_std_error(&jerr.base);
    jerr.base.error_exit = jpeg_error_exit_longjmp;
    jerr.base.output_message = jpeg_silent_output;
    if (setjmp(jerr.jump)) {
        error = jerr.message;
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    width = static_cast<int>(cinfo.image_width);
    height = static_cast<int>(cinfo.image_height);
    if (header_only) {
        jpeg_destroy_decompress(&cinfo);
        return true;
    }
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
        std::strcpy(jerr.message, "CMYK JPEG is not supported");
        jpeg_destroy_decompress(&cinfo);
        error = jerr.message;
        return false;
    }
    cinfo.out_color_space = JCS_RGB;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&cinfo);
    const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * cinfo.output_components;
    rgb.resize(stride * cinfo.output_height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = rgb.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

bool jpeg_encode_raw(int width, int height, const std::uint8_t* rgb, int quality, unsigned char*& buffer,
                     unsigned long& size, std::string& error) {
    jpeg_compress_struct cinfo{};
    JpegErrorManager jerr{};
    cinfo.err = jpeg_std_error(&jerr.base);
    jerr.base.error_exit = jpeg_error_exit_longjmp;
    jerr.base.output_message = jpeg_silent_output;
    if (setjmp(jerr.jump)) {
        error = jerr.message;
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(width);
    cinfo.image_height = static_cast<JDIMENSION>(height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    for (int c = 0; c < cinfo.num_components; ++c) {
        cinfo.comp_info[c].h_samp_factor = 1;
        cinfo.comp_info[c].v_samp_factor = 1;
    }
    cinfo.dct_method = JDCT_ISLOW;
    cinfo.optimize_coding = FALSE;
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(rgb + cinfo.next_scanline * stride);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

std::vector<std::uint8_t> to_interleaved(const ImageU8& img) {
    std::vector<std::uint8_t> out(img.samples().size());
    const int w = img.width();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                out[(static_cast<std::size_t>(y) * w + x) * 3 + c] = img.at(c, y, x);
            }
        }
    }
    return out;
}

}  // namespace

ImageU8 decode_image(std::span<const std::uint8_t> bytes) {
    switch (sniff_format(bytes)) {
        case ImageFormat::Png:
            return decode_png(bytes);
        case ImageFormat::Jpeg: {
            int width = 0;
            int height = 0;
            std::vector<std::uint8_t> rgb;
            std::string error;
            if (!jpeg_decode_raw(bytes, width, height, rgb, false, error)) {
                throw FormatError("JPEG: " + error);
            }
            if (width == 0 || height == 0) {
                throw FormatError("JPEG: zero-dimension image");
            }
            ImageU8 img(width, height);
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        img.at(c, y, x) = rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
                    }
                }
            }
            return img;
        }
        case ImageFormat::Unknown:
            break;
    }
    throw FormatError("unsupported image format (expected PNG or JPEG)");
}

ImageU8 load_image(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

ImageInfo probe_image(std::span<const std::uint8_t> bytes) {
    switch (sniff_format(bytes)) {
        case ImageFormat::Png:
            return probe_png(bytes);
        case ImageFormat::Jpeg: {
            ImageInfo info{ImageFormat::Jpeg, 0, 0};
            std::vector<std::uint8_t> unused;
            std::string error;
            if (!jpeg_decode_raw(bytes, info.width, info.height, unused, true, error)) {
                throw FormatError("JPEG: " + error);
            }
            return info;
        }
        case ImageFormat::Unknown:
            break;
    }
    throw FormatError("unsupported image format (expected PNG or JPEG)");
}

ImageInfo probe_image(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    try {
        return probe_image(std::span<const std::uint8_t>(bytes));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

Bytes encode_png(const ImageU8& img) {
    const auto interleaved = to_interleaved(img);
    return write_png(img.width(), img.height(), PNG_COLOR_TYPE_RGB, 3, interleaved);
}

Bytes encode_png_gray(int width, int height, std::span<const std::uint8_t> samples) {
    if (width < 1 || height < 1 || samples.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("encode_png_gray: sample count does not match dimensions");
    }
    return write_png(width, height, PNG_COLOR_TYPE_GRAY, 1, samples);
}

Bytes encode_jpeg(const ImageU8& img, int quality) {
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("JPEG quality must be in [1, 100], got " + std::to_string(quality));
    }
    const auto interleaved = to_interleaved(img);
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    std::string error;
    const bool ok = jpeg_encode_raw(img.width(), img.height(), interleaved.data(), quality, buffer, size, error);
    Bytes out;
    if (ok) {
        out.assign(buffer, buffer + size);
    }
    std::free(buffer);
    if (!ok) {
        throw FormatError("JPEG encode: " + error);
    }
    return out;
}

}  // namespace noisent
