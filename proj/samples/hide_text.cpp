// Hides a short message in a 32x32 carrier, writes it as PNG and reads it back.
// usage: hide_text [out.png]

#include <iostream>
#include <string>

#include "sd2/sd2.hpp"

int main(int argc, char** argv) {
    const std::string out = argc > 1 ? argv[1] : "hide_text.png";
    const sd2::ChaosKey key{};  // mu 3.9, r 0.6, k 14
    const sd2::NoiseSchedule schedule = sd2::build_schedule(200, 1e-4, 0.02);
    const sd2::AnalyticGaussianDenoiser den({0.1, 0.0, -0.1}, {0.09, 0.09, 0.09}, schedule);
    const sd2::BitPlan plan;  // 3/3/2

    const std::string message = "meet at the old mill at dawn";
    sd2::Payload payload{sd2::PayloadKind::Text, {}, {message.begin(), message.end()}};

    const sd2::StegoImage carrier = sd2::generate_stego(key, payload, den, schedule, plan, 42, {32, 32});
    sd2::write_png(out, carrier);

    const sd2::Payload back = sd2::extract_payload(sd2::read_png(out), key, plan);
    std::cout << std::string(back.body.begin(), back.body.end()) << "\n";
    return back == payload ? 0 : 1;
}
