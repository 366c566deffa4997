#include "minadv/data_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace minadv {

static bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

static std::vector<unsigned char> read_bytes(const std::string& path) {
    std::vector<unsigned char> data;
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw FormatError("cannot open " + path);
        unsigned char buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof(buf))) > 0) {
            data.insert(data.end(), buf, buf + n);
        }
        bool bad = n < 0;
        gzclose(f);
        if (bad) throw FormatError("gzip read error in " + path);
    } else {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw FormatError("cannot open " + path);
        data.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    return data;
}

static uint32_t be32(const std::vector<unsigned char>& d, size_t off, const std::string& path,
                     const char* field) {
    if (off + 4 > d.size()) {
        throw FormatError(path + ": truncated before " + field);
    }
    return (uint32_t(d[off]) << 24) | (uint32_t(d[off + 1]) << 16) | (uint32_t(d[off + 2]) << 8) |
           uint32_t(d[off + 3]);
}

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    auto img = read_bytes(images_path);
    auto lab = read_bytes(labels_path);

    uint32_t img_magic = be32(img, 0, images_path, "images magic");
    if (img_magic != 2051) {
        throw FormatError(images_path + ": images magic is " + std::to_string(img_magic) +
                          ", want 2051");
    }
    uint32_t n_img = be32(img, 4, images_path, "images count");
    uint32_t rows = be32(img, 8, images_path, "images rows");
    uint32_t cols = be32(img, 12, images_path, "images cols");

    uint32_t lab_magic = be32(lab, 0, labels_path, "labels magic");
    if (lab_magic != 2049) {
        throw FormatError(labels_path + ": labels magic is " + std::to_string(lab_magic) +
                          ", want 2049");
    }
    uint32_t n_lab = be32(lab, 4, labels_path, "labels count");
    if (n_img != n_lab) {
        throw FormatError("count mismatch: " + std::to_string(n_img) + " images vs " +
                          std::to_string(n_lab) + " labels");
    }

    size_t dim = size_t(rows) * cols;
    if (img.size() != 16 + size_t(n_img) * dim) {
        throw FormatError(images_path + ": pixel payload size does not match images count");
    }
    if (lab.size() != 8 + size_t(n_lab)) {
        throw FormatError(labels_path + ": label payload size does not match labels count");
    }

    Dataset ds;
    ds.samples.resize(n_img);
    for (uint32_t i = 0; i < n_img; ++i) {
        Sample& s = ds.samples[i];
        s.pixels.resize(dim);
        const unsigned char* p = img.data() + 16 + size_t(i) * dim;
        for (size_t j = 0; j < dim; ++j) s.pixels[j] = p[j] / 255.0;
        s.label = lab[8 + i];
    }
    return ds;
}

static std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_network(const Network& net, const std::string& path) {
    net.validate();
    std::ostringstream out;
    out << "minadv-net 1\n";
    out << "dims";
    for (int d : net.layer_dims) out << ' ' << d;
    out << '\n';
    for (size_t k = 0; k < net.weights.size(); ++k) {
        out << "layer " << k << '\n';
        const Mat& w = net.weights[k];
        for (int i = 0; i < w.rows; ++i) {
            out << 'w';
            for (int j = 0; j < w.cols; ++j) out << ' ' << fmt17(w(i, j));
            out << '\n';
        }
        out << 'b';
        for (double b : net.biases[k]) out << ' ' << fmt17(b);
        out << '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    f << out.str();
}

Network load_network(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    std::string tok;
    int version;
    if (!(f >> tok >> version) || tok != "minadv-net" || version != 1) {
        throw FormatError(path + ": bad header, want 'minadv-net 1'");
    }
    if (!(f >> tok) || tok != "dims") throw FormatError(path + ": missing dims line");

    Network net;
    std::string line;
    std::getline(f, line);
    std::istringstream dims(line);
    int d;
    while (dims >> d) net.layer_dims.push_back(d);
    if (net.layer_dims.size() < 3) throw FormatError(path + ": dims must list at least 3 layers");

    for (size_t k = 0; k + 1 < net.layer_dims.size(); ++k) {
        size_t idx;
        if (!(f >> tok >> idx) || tok != "layer" || idx != k) {
            throw FormatError(path + ": expected 'layer " + std::to_string(k) + "'");
        }
        int out_dim = net.layer_dims[k + 1];
        int in_dim = net.layer_dims[k];
        Mat w(out_dim, in_dim);
        for (int i = 0; i < out_dim; ++i) {
            if (!(f >> tok) || tok != "w") {
                throw FormatError(path + ": expected weight row " + std::to_string(i) +
                                  " in layer " + std::to_string(k));
            }
            for (int j = 0; j < in_dim; ++j) {
                if (!(f >> w(i, j))) {
                    throw FormatError(path + ": truncated weight row in layer " + std::to_string(k));
                }
            }
        }
        Vec b(out_dim);
        if (!(f >> tok) || tok != "b") {
            throw FormatError(path + ": expected bias line in layer " + std::to_string(k));
        }
        for (int i = 0; i < out_dim; ++i) {
            if (!(f >> b[i])) {
                throw FormatError(path + ": truncated bias line in layer " + std::to_string(k));
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.validate();
    return net;
}

}  // namespace minadv
