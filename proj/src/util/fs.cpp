#include "relmatch/util/fs.hpp"

#include "relmatch/errors.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace relmatch::util {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open file for reading: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoFailure("read failed: " + path.string());
    }
    return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoFailure("cannot open file for writing: " + tmp.string());
        }
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) {
            throw IoFailure("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoFailure("rename failed: " + tmp.string() + " -> " + path.string() +
                        " (" + ec.message() + ")");
    }
}

} // namespace relmatch::util
