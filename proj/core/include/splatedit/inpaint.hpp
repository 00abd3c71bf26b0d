#pragma once

#include "splatedit/pipeline.hpp"
#include "splatedit/scene.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace splatedit {

struct InpaintRequest {
    std::vector<ViewBundle> bundles;
    std::string prompt;
    std::size_t conditioning_view_index = 0;
    std::uint64_t seed = 0;

    /// Throws ParameterError when empty, out of range, or a bundle is invalid.
    void validate() const;
};

struct InpaintResponse {
    std::vector<Image> images;  ///< one RGB image per bundle, in request order
    std::uint64_t seed = 0;     ///< echoed from the request
};

/// Anything that turns view bundles into inpainted views.
class InpaintEndpoint {
public:
    virtual ~InpaintEndpoint() = default;
    /// Raw service answer, before mask compositing.
    virtual InpaintResponse submit(const InpaintRequest& request) = 0;
};

/// Sends the request and composites each answer into its bundle's
/// background inside the mask, so pixels outside the mask are exactly the
/// background. Throws ProtocolError when the answer has the wrong number of
/// images or wrong sizes.
InpaintResponse inpaint(const InpaintRequest& request, InpaintEndpoint& endpoint);

/// Procedural object kinds used by the mock.
enum class MockShape { blob, snowman, crate, ring };

/// Procedural object chosen by (prompt, seed) and fitted inside `bbox`:
/// the prompt picks the shape, the seed picks the color from a palette.
GaussianScene mock_object(const OrientedBBox& bbox, const std::string& prompt, std::uint64_t seed,
                          int sh_degree = 0);
MockShape mock_shape_for(const std::string& prompt);
Vec3d mock_color_for(std::uint64_t seed);

/// Deterministic test double for a multi-view inpainting model. Each view
/// is a real render of the hidden object: together with `original` when
/// given, otherwise alone and alpha-blended over the bundle background.
class MockInpainter : public InpaintEndpoint {
public:
    MockInpainter(OrientedBBox bbox, std::optional<GaussianScene> original = std::nullopt,
                  Vec3d render_background = Vec3d::Zero());

    InpaintResponse submit(const InpaintRequest& request) override;

    /// The object that the last submit() inserted (ground truth for tests).
    const GaussianScene& hidden_object() const { return hidden_; }

    /// Renders the views a request would produce for (prompt, seed).
    std::vector<Image> render_views(std::span<const ViewBundle> bundles, const std::string& prompt,
                                    std::uint64_t seed);

private:
    OrientedBBox bbox_;
    std::optional<GaussianScene> original_;
    Vec3d render_background_;
    GaussianScene hidden_;
};

/// mock_inpainter(bundles, prompt, seed): the mock's raw views.
std::vector<Image> mock_inpainter(std::span<const ViewBundle> bundles, const std::string& prompt,
                                  std::uint64_t seed, const OrientedBBox& bbox,
                                  const GaussianScene* original = nullptr);

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    double backoff_factor = 2.0;
    std::chrono::seconds timeout{600};
};

/// Client for the HTTP wire protocol (POST /v1/inpaint).
class HttpInpainter : public InpaintEndpoint {
public:
    /// `base_url` like "http://127.0.0.1:8080".
    explicit HttpInpainter(std::string base_url, RetryPolicy policy = {});

    /// Throws TransportError after `policy.attempts` failed attempts and
    /// ProtocolError on a malformed answer.
    InpaintResponse submit(const InpaintRequest& request) override;

    /// GET /v1/health; returns the decoded JSON body.
    std::string health();

    int attempts_made() const { return attempts_made_; }

private:
    std::string base_url_;
    RetryPolicy policy_;
    int attempts_made_ = 0;
};

/// Builds "mock" or HTTP endpoints from a config string.
std::unique_ptr<InpaintEndpoint> make_endpoint(const std::string& endpoint, const OrientedBBox& bbox,
                                               std::optional<GaussianScene> original = std::nullopt,
                                               RetryPolicy policy = {});

}  // namespace splatedit
