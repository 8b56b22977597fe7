#pragma once

// Umbrella header. The OpenCV-backed media engine and the HTTP pieces are
// included only when asked for, so light users avoid those dependencies.

#include "lave/agent.hpp"
#include "lave/config.hpp"
#include "lave/error.hpp"
#include "lave/functions.hpp"
#include "lave/media.hpp"
#include "lave/mock_provider.hpp"
#include "lave/narration.hpp"
#include "lave/project.hpp"
#include "lave/providers.hpp"
#include "lave/service.hpp"
#include "lave/structured.hpp"
#include "lave/templates.hpp"
#include "lave/vectorstore.hpp"

#ifdef LAVE_WITH_OPENCV
#include "lave/media_opencv.hpp"
#endif
#ifdef LAVE_WITH_HTTP
#include "lave/http_provider.hpp"
#include "lave/http_server.hpp"
#endif
