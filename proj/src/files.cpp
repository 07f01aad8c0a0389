#include "sheetaudit/files.hpp"

#include "sheetaudit/error.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace sheetaudit {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw UnreadableFile("cannot read '" + path.string() + "'");
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    std::filesystem::path temp = path;
    temp += ".tmp-" + std::to_string(tid) + "-" + std::to_string(counter++);
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot create '" + temp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(temp, ignored);
            throw IoFailure("cannot write '" + temp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        throw IoFailure("cannot replace '" + path.string() + "': " + ec.message());
    }
}

}  // namespace sheetaudit
