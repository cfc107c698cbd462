#pragma once

#include "rotassign/geometry.hpp"
#include "rotassign/pyramid.hpp"
#include "rotassign/assignment.hpp"
#include "rotassign/weighting.hpp"
#include "rotassign/loss.hpp"
#include "rotassign/ingest.hpp"
#include "rotassign/synthetic.hpp"
#include "rotassign/report.hpp"
