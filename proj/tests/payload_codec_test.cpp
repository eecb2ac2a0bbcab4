#include <gtest/gtest.h>

#include <random>

#include "sd2/payload_codec.hpp"

namespace {

std::vector<std::uint8_t> pad_bytes(std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>(0xA5 ^ i);
    return v;
}

TEST(FramePayload, HeaderOnly) {
    sd2::Payload p{sd2::PayloadKind::RawBytes, {}, {}};
    const auto block = sd2::frame_payload(p, 16, std::span<const std::uint8_t>{});
    EXPECT_EQ(block.serialized_size(), 16u);
    EXPECT_TRUE(block.padding.empty());
    EXPECT_EQ(sd2::unframe_payload(block.serialize()), p);
}

TEST(FramePayload, GrayImageFillsCapacity) {
    sd2::Payload p{sd2::PayloadKind::GrayImage, {128, 128}, std::vector<std::uint8_t>(16384, 7)};
    const auto block = sd2::frame_payload(p, 16400, std::span<const std::uint8_t>{});
    EXPECT_EQ(block.padding.size(), 0u);
    EXPECT_EQ(block.serialized_size(), 16400u);
}

TEST(FramePayload, TextGetsKeystreamPadding) {
    sd2::Payload p{sd2::PayloadKind::Text, {}, {'A', 'B'}};
    const auto pad = pad_bytes(200);
    const auto block = sd2::frame_payload(p, 100, std::span<const std::uint8_t>(pad));
    EXPECT_EQ(block.padding.size(), 82u);
    const auto s = block.serialize();
    ASSERT_EQ(s.size(), 100u);
    EXPECT_TRUE(std::equal(s.begin() + 18, s.end(), pad.begin()));
}

TEST(FramePayload, HeaderLayout) {
    sd2::Payload p{sd2::PayloadKind::GrayImage, {2, 3}, std::vector<std::uint8_t>(6, 0x11)};
    const auto s = sd2::frame_payload(p, 22, std::span<const std::uint8_t>{}).serialize();
    const std::vector<std::uint8_t> header{0, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 6};
    EXPECT_TRUE(std::equal(header.begin(), header.end(), s.begin()));
}

TEST(FramePayload, CapacityExceededReportsBothSides) {
    sd2::Payload p{sd2::PayloadKind::RawBytes, {}, std::vector<std::uint8_t>(100)};
    try {
        sd2::frame_payload(p, 64, std::span<const std::uint8_t>{});
        FAIL();
    } catch (const sd2::CapacityError& e) {
        EXPECT_EQ(e.kind(), sd2::ErrorKind::CapacityExceeded);
        EXPECT_EQ(e.required(), 116u);
        EXPECT_EQ(e.available(), 64u);
    }
}

TEST(UnframePayload, MalformedHeaders) {
    std::vector<std::uint8_t> block(40, 0);
    block[0] = static_cast<std::uint8_t>(sd2::PayloadKind::RawBytes);
    block[15] = 25;  // declared 25 > 24 available
    try {
        sd2::unframe_payload(block);
        FAIL();
    } catch (const sd2::Error& e) {
        EXPECT_EQ(e.kind(), sd2::ErrorKind::MalformedHeader);
    }
    block[15] = 24;
    EXPECT_EQ(sd2::unframe_payload(block).body.size(), 24u);

    block[0] = 0xFF;
    try {
        sd2::unframe_payload(block);
        FAIL();
    } catch (const sd2::Error& e) {
        EXPECT_EQ(e.kind(), sd2::ErrorKind::UnknownKind);
    }
    EXPECT_THROW(sd2::unframe_payload(std::span<const std::uint8_t>(block.data(), 15)), sd2::Error);

    // text payload carrying image dimensions
    block[0] = static_cast<std::uint8_t>(sd2::PayloadKind::Text);
    block[4] = 1;
    EXPECT_THROW(sd2::unframe_payload(block), sd2::Error);
}

TEST(UnframePayload, RoundTripProperty) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t capacity = 16 + rng() % 600;
        const std::size_t len = rng() % (capacity - 15);
        sd2::Payload p;
        p.kind = static_cast<sd2::PayloadKind>(1 + rng() % 3);
        p.body.resize(len);
        for (auto& b : p.body) b = static_cast<std::uint8_t>(rng());
        if (trial % 5 == 0 && len > 0) {
            p.kind = sd2::PayloadKind::GrayImage;
            p.meta = {static_cast<std::uint32_t>(len), 1};
        }
        const auto pad = pad_bytes(capacity);
        const auto block = sd2::frame_payload(p, capacity, std::span<const std::uint8_t>(pad));
        ASSERT_EQ(block.serialized_size(), capacity);
        ASSERT_EQ(sd2::unframe_payload(block.serialize()), p);
    }
}

TEST(BitStream, KnownBytes) {
    const std::uint8_t zero = 0x00, b2 = 0xB2;
    EXPECT_EQ(sd2::bytes_to_bits({&zero, 1}).bits, (std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 0}));
    EXPECT_EQ(sd2::bytes_to_bits({&b2, 1}).bits, (std::vector<std::uint8_t>{1, 0, 1, 1, 0, 0, 1, 0}));
}

TEST(BitStream, LengthMustBeMultipleOfEight) {
    sd2::BitStream s{{1, 0, 1}};
    EXPECT_THROW(sd2::bits_to_bytes(s), sd2::Error);
}

TEST(BitStream, RoundTripRandomBytes) {
    std::mt19937 rng(9);
    std::vector<std::uint8_t> bytes(10000);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const auto bits = sd2::bytes_to_bits(bytes);
    EXPECT_EQ(bits.size(), 80000u);
    EXPECT_EQ(sd2::bits_to_bytes(bits), bytes);
}

} // namespace
