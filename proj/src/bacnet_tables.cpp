#include "bacsum/bacnet_tables.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

namespace bacsum::tables {
namespace {

constexpr std::array kObjectTypes = {
    NamedCode{0, "analog-input"},
    NamedCode{1, "analog-output"},
    NamedCode{2, "analog-value"},
    NamedCode{3, "binary-input"},
    NamedCode{4, "binary-output"},
    NamedCode{5, "binary-value"},
    NamedCode{6, "calendar"},
    NamedCode{7, "command"},
    NamedCode{8, "device"},
    NamedCode{9, "event-enrollment"},
    NamedCode{10, "file"},
    NamedCode{11, "group"},
    NamedCode{12, "loop"},
    NamedCode{13, "multi-state-input"},
    NamedCode{14, "multi-state-output"},
    NamedCode{15, "notification-class"},
    NamedCode{16, "program"},
    NamedCode{17, "schedule"},
    NamedCode{18, "averaging"},
    NamedCode{19, "multi-state-value"},
    NamedCode{20, "trend-log"},
    NamedCode{21, "life-safety-point"},
    NamedCode{22, "life-safety-zone"},
    NamedCode{23, "accumulator"},
    NamedCode{24, "pulse-converter"},
    NamedCode{25, "event-log"},
    NamedCode{26, "global-group"},
    NamedCode{27, "trend-log-multiple"},
    NamedCode{28, "load-control"},
    NamedCode{29, "structured-view"},
    NamedCode{30, "access-door"},
    NamedCode{31, "timer"},
    NamedCode{32, "access-credential"},
    NamedCode{33, "access-point"},
    NamedCode{34, "access-rights"},
    NamedCode{35, "access-user"},
    NamedCode{36, "access-zone"},
    NamedCode{37, "credential-data-input"},
    NamedCode{38, "network-security"},
    NamedCode{39, "bitstring-value"},
    NamedCode{40, "characterstring-value"},
    NamedCode{41, "date-pattern-value"},
    NamedCode{42, "date-value"},
    NamedCode{43, "datetime-pattern-value"},
    NamedCode{44, "datetime-value"},
    NamedCode{45, "integer-value"},
    NamedCode{46, "large-analog-value"},
    NamedCode{47, "octetstring-value"},
    NamedCode{48, "positive-integer-value"},
    NamedCode{49, "time-pattern-value"},
    NamedCode{50, "time-value"},
    NamedCode{51, "notification-forwarder"},
    NamedCode{52, "alert-enrollment"},
    NamedCode{53, "channel"},
    NamedCode{54, "lighting-output"},
    NamedCode{55, "binary-lighting-output"},
    NamedCode{56, "network-port"},
    NamedCode{57, "elevator-group"},
    NamedCode{58, "escalator"},
    NamedCode{59, "lift"},
    NamedCode{60, "staging"},
    NamedCode{61, "audit-log"},
    NamedCode{62, "audit-reporter"},
    NamedCode{63, "color"},
    NamedCode{64, "color-temperature"},
};

constexpr std::array kProperties = {
    NamedCode{0, "acked-transitions"},
    NamedCode{1, "ack-required"},
    NamedCode{2, "action"},
    NamedCode{3, "action-text"},
    NamedCode{4, "active-text"},
    NamedCode{5, "active-vt-sessions"},
    NamedCode{6, "alarm-value"},
    NamedCode{7, "alarm-values"},
    NamedCode{8, "all"},
    NamedCode{9, "all-writes-successful"},
    NamedCode{10, "apdu-segment-timeout"},
    NamedCode{11, "apdu-timeout"},
    NamedCode{12, "application-software-version"},
    NamedCode{13, "archive"},
    NamedCode{14, "bias"},
    NamedCode{15, "change-of-state-count"},
    NamedCode{16, "change-of-state-time"},
    NamedCode{17, "notification-class"},
    NamedCode{19, "controlled-variable-reference"},
    NamedCode{20, "controlled-variable-units"},
    NamedCode{21, "controlled-variable-value"},
    NamedCode{22, "cov-increment"},
    NamedCode{23, "date-list"},
    NamedCode{24, "daylight-savings-status"},
    NamedCode{25, "deadband"},
    NamedCode{26, "derivative-constant"},
    NamedCode{27, "derivative-constant-units"},
    NamedCode{28, "description"},
    NamedCode{29, "description-of-halt"},
    NamedCode{30, "device-address-binding"},
    NamedCode{31, "device-type"},
    NamedCode{32, "effective-period"},
    NamedCode{33, "elapsed-active-time"},
    NamedCode{34, "error-limit"},
    NamedCode{35, "event-enable"},
    NamedCode{36, "event-state"},
    NamedCode{37, "event-type"},
    NamedCode{38, "exception-schedule"},
    NamedCode{39, "fault-values"},
    NamedCode{40, "feedback-value"},
    NamedCode{41, "file-access-method"},
    NamedCode{42, "file-size"},
    NamedCode{43, "file-type"},
    NamedCode{44, "firmware-revision"},
    NamedCode{45, "high-limit"},
    NamedCode{46, "inactive-text"},
    NamedCode{47, "in-process"},
    NamedCode{48, "instance-of"},
    NamedCode{49, "integral-constant"},
    NamedCode{50, "integral-constant-units"},
    NamedCode{52, "limit-enable"},
    NamedCode{53, "list-of-group-members"},
    NamedCode{54, "list-of-object-property-references"},
    NamedCode{56, "local-date"},
    NamedCode{57, "local-time"},
    NamedCode{58, "location"},
    NamedCode{59, "low-limit"},
    NamedCode{60, "manipulated-variable-reference"},
    NamedCode{61, "maximum-output"},
    NamedCode{62, "max-apdu-length-accepted"},
    NamedCode{63, "max-info-frames"},
    NamedCode{64, "max-master"},
    NamedCode{65, "max-pres-value"},
    NamedCode{66, "minimum-off-time"},
    NamedCode{67, "minimum-on-time"},
    NamedCode{68, "minimum-output"},
    NamedCode{69, "min-pres-value"},
    NamedCode{70, "model-name"},
    NamedCode{71, "modification-date"},
    NamedCode{72, "notify-type"},
    NamedCode{73, "number-of-apdu-retries"},
    NamedCode{74, "number-of-states"},
    NamedCode{75, "object-identifier"},
    NamedCode{76, "object-list"},
    NamedCode{77, "object-name"},
    NamedCode{78, "object-property-reference"},
    NamedCode{79, "object-type"},
    NamedCode{80, "optional"},
    NamedCode{81, "out-of-service"},
    NamedCode{82, "output-units"},
    NamedCode{83, "event-parameters"},
    NamedCode{84, "polarity"},
    NamedCode{85, "present-value"},
    NamedCode{86, "priority"},
    NamedCode{87, "priority-array"},
    NamedCode{88, "priority-for-writing"},
    NamedCode{89, "process-identifier"},
    NamedCode{90, "program-change"},
    NamedCode{91, "program-location"},
    NamedCode{92, "program-state"},
    NamedCode{93, "proportional-constant"},
    NamedCode{94, "proportional-constant-units"},
    NamedCode{96, "protocol-object-types-supported"},
    NamedCode{97, "protocol-services-supported"},
    NamedCode{98, "protocol-version"},
    NamedCode{99, "read-only"},
    NamedCode{100, "reason-for-halt"},
    NamedCode{102, "recipient-list"},
    NamedCode{103, "reliability"},
    NamedCode{104, "relinquish-default"},
    NamedCode{105, "required"},
    NamedCode{106, "resolution"},
    NamedCode{107, "segmentation-supported"},
    NamedCode{108, "setpoint"},
    NamedCode{109, "setpoint-reference"},
    NamedCode{110, "state-text"},
    NamedCode{111, "status-flags"},
    NamedCode{112, "system-status"},
    NamedCode{113, "time-delay"},
    NamedCode{114, "time-of-active-time-reset"},
    NamedCode{115, "time-of-state-count-reset"},
    NamedCode{116, "time-synchronization-recipients"},
    NamedCode{117, "units"},
    NamedCode{118, "update-interval"},
    NamedCode{119, "utc-offset"},
    NamedCode{120, "vendor-identifier"},
    NamedCode{121, "vendor-name"},
    NamedCode{122, "vt-classes-supported"},
    NamedCode{123, "weekly-schedule"},
    NamedCode{139, "protocol-revision"},
    NamedCode{155, "database-revision"},
    NamedCode{168, "profile-name"},
    NamedCode{371, "property-list"},
};

constexpr std::array kConfirmedServices = {
    NamedCode{0, "acknowledgeAlarm"},
    NamedCode{1, "confirmedCOVNotification"},
    NamedCode{2, "confirmedEventNotification"},
    NamedCode{3, "getAlarmSummary"},
    NamedCode{4, "getEnrollmentSummary"},
    NamedCode{5, "subscribeCOV"},
    NamedCode{6, "atomicReadFile"},
    NamedCode{7, "atomicWriteFile"},
    NamedCode{8, "addListElement"},
    NamedCode{9, "removeListElement"},
    NamedCode{10, "createObject"},
    NamedCode{11, "deleteObject"},
    NamedCode{12, "readProperty"},
    NamedCode{13, "readPropertyConditional"},
    NamedCode{14, "readPropertyMultiple"},
    NamedCode{15, "writeProperty"},
    NamedCode{16, "writePropertyMultiple"},
    NamedCode{17, "deviceCommunicationControl"},
    NamedCode{18, "confirmedPrivateTransfer"},
    NamedCode{19, "confirmedTextMessage"},
    NamedCode{20, "reinitializeDevice"},
    NamedCode{21, "vtOpen"},
    NamedCode{22, "vtClose"},
    NamedCode{23, "vtData"},
    NamedCode{24, "authenticate"},
    NamedCode{25, "requestKey"},
    NamedCode{26, "readRange"},
    NamedCode{27, "lifeSafetyOperation"},
    NamedCode{28, "subscribeCOVProperty"},
    NamedCode{29, "getEventInformation"},
    NamedCode{30, "subscribeCOVPropertyMultiple"},
    NamedCode{31, "confirmedCOVNotificationMultiple"},
    NamedCode{32, "confirmedAuditNotification"},
    NamedCode{33, "auditLogQuery"},
};

constexpr std::array kUnconfirmedServices = {
    NamedCode{0, "i-Am"},
    NamedCode{1, "i-Have"},
    NamedCode{2, "unconfirmedCOVNotification"},
    NamedCode{3, "unconfirmedEventNotification"},
    NamedCode{4, "unconfirmedPrivateTransfer"},
    NamedCode{5, "unconfirmedTextMessage"},
    NamedCode{6, "timeSynchronization"},
    NamedCode{7, "who-Has"},
    NamedCode{8, "who-Is"},
    NamedCode{9, "utcTimeSynchronization"},
    NamedCode{10, "writeGroup"},
    NamedCode{11, "unconfirmedCOVNotificationMultiple"},
    NamedCode{12, "unconfirmedAuditNotification"},
    NamedCode{13, "who-Am-I"},
    NamedCode{14, "you-Are"},
};

constexpr std::array kErrorClasses = {
    NamedCode{0, "device"},   NamedCode{1, "object"},   NamedCode{2, "property"},
    NamedCode{3, "resources"}, NamedCode{4, "security"}, NamedCode{5, "services"},
    NamedCode{6, "vt"},       NamedCode{7, "communication"},
};

constexpr std::array kErrorCodes = {
    NamedCode{0, "other"},
    NamedCode{1, "authentication-failed"},
    NamedCode{2, "configuration-in-progress"},
    NamedCode{3, "device-busy"},
    NamedCode{4, "dynamic-creation-not-supported"},
    NamedCode{5, "file-access-denied"},
    NamedCode{6, "incompatible-security-levels"},
    NamedCode{7, "inconsistent-parameters"},
    NamedCode{8, "inconsistent-selection-criterion"},
    NamedCode{9, "invalid-data-type"},
    NamedCode{10, "invalid-file-access-method"},
    NamedCode{11, "invalid-file-start-position"},
    NamedCode{12, "invalid-operator-name"},
    NamedCode{13, "invalid-parameter-data-type"},
    NamedCode{14, "invalid-time-stamp"},
    NamedCode{15, "key-generation-error"},
    NamedCode{16, "missing-required-parameter"},
    NamedCode{17, "no-objects-of-specified-type"},
    NamedCode{18, "no-space-for-object"},
    NamedCode{19, "no-space-to-add-list-element"},
    NamedCode{20, "no-space-to-write-property"},
    NamedCode{21, "no-vt-sessions-available"},
    NamedCode{22, "property-is-not-a-list"},
    NamedCode{23, "object-deletion-not-permitted"},
    NamedCode{24, "object-identifier-already-exists"},
    NamedCode{25, "operational-problem"},
    NamedCode{26, "password-failure"},
    NamedCode{27, "read-access-denied"},
    NamedCode{28, "security-not-supported"},
    NamedCode{29, "service-request-denied"},
    NamedCode{30, "timeout"},
    NamedCode{31, "unknown-object"},
    NamedCode{32, "unknown-property"},
    NamedCode{34, "unknown-vt-class"},
    NamedCode{35, "unknown-vt-session"},
    NamedCode{36, "unsupported-object-type"},
    NamedCode{37, "value-out-of-range"},
    NamedCode{38, "vt-session-already-closed"},
    NamedCode{39, "vt-session-termination-failure"},
    NamedCode{40, "write-access-denied"},
    NamedCode{41, "character-set-not-supported"},
    NamedCode{42, "invalid-array-index"},
    NamedCode{43, "cov-subscription-failed"},
    NamedCode{44, "not-cov-property"},
    NamedCode{45, "optional-functionality-not-supported"},
    NamedCode{46, "invalid-configuration-data"},
    NamedCode{47, "datatype-not-supported"},
    NamedCode{48, "duplicate-name"},
    NamedCode{49, "duplicate-object-id"},
    NamedCode{50, "property-is-not-an-array"},
};

constexpr std::array kRejectReasons = {
    NamedCode{0, "other"},
    NamedCode{1, "buffer-overflow"},
    NamedCode{2, "inconsistent-parameters"},
    NamedCode{3, "invalid-parameter-data-type"},
    NamedCode{4, "invalid-tag"},
    NamedCode{5, "missing-required-parameter"},
    NamedCode{6, "parameter-out-of-range"},
    NamedCode{7, "too-many-arguments"},
    NamedCode{8, "undefined-enumeration"},
    NamedCode{9, "unrecognized-service"},
};

constexpr std::array kAbortReasons = {
    NamedCode{0, "other"},
    NamedCode{1, "buffer-overflow"},
    NamedCode{2, "invalid-apdu-in-this-state"},
    NamedCode{3, "preempted-by-higher-priority-task"},
    NamedCode{4, "segmentation-not-supported"},
    NamedCode{5, "security-error"},
    NamedCode{6, "insufficient-security"},
    NamedCode{7, "window-size-out-of-range"},
    NamedCode{8, "application-exceeded-reply-time"},
    NamedCode{9, "out-of-resources"},
    NamedCode{10, "tsm-timeout"},
    NamedCode{11, "apdu-too-long"},
};

constexpr std::array kBvlcFunctions = {
    NamedCode{0x00, "BVLC-Result"},
    NamedCode{0x01, "Write-Broadcast-Distribution-Table"},
    NamedCode{0x02, "Read-Broadcast-Distribution-Table"},
    NamedCode{0x03, "Read-Broadcast-Distribution-Table-Ack"},
    NamedCode{0x04, "Forwarded-NPDU"},
    NamedCode{0x05, "Register-Foreign-Device"},
    NamedCode{0x06, "Read-Foreign-Device-Table"},
    NamedCode{0x07, "Read-Foreign-Device-Table-Ack"},
    NamedCode{0x08, "Delete-Foreign-Device-Table-Entry"},
    NamedCode{0x09, "Distribute-Broadcast-To-Network"},
    NamedCode{0x0A, "Original-Unicast-NPDU"},
    NamedCode{0x0B, "Original-Broadcast-NPDU"},
    NamedCode{0x0C, "Secure-BVLL"},
};

constexpr std::array kNetworkMessages = {
    NamedCode{0x00, "Who-Is-Router-To-Network"},
    NamedCode{0x01, "I-Am-Router-To-Network"},
    NamedCode{0x02, "I-Could-Be-Router-To-Network"},
    NamedCode{0x03, "Reject-Message-To-Network"},
    NamedCode{0x04, "Router-Busy-To-Network"},
    NamedCode{0x05, "Router-Available-To-Network"},
    NamedCode{0x06, "Initialize-Routing-Table"},
    NamedCode{0x07, "Initialize-Routing-Table-Ack"},
    NamedCode{0x08, "Establish-Connection-To-Network"},
    NamedCode{0x09, "Disconnect-Connection-To-Network"},
    NamedCode{0x12, "What-Is-Network-Number"},
    NamedCode{0x13, "Network-Number-Is"},
};

template <std::size_t N>
std::string_view find(const std::array<NamedCode, N>& table, std::uint32_t code) noexcept {
  auto it = std::lower_bound(table.begin(), table.end(), code,
                             [](const NamedCode& e, std::uint32_t c) { return e.code < c; });
  if (it != table.end() && it->code == code) return it->name;
  return {};
}

}  // namespace

std::string_view object_type_name(std::uint32_t code) noexcept { return find(kObjectTypes, code); }

std::optional<std::uint16_t> object_type_code(std::string_view name) noexcept {
  for (const auto& e : kObjectTypes) {
    if (e.name == name) return static_cast<std::uint16_t>(e.code);
  }
  return std::nullopt;
}

std::string_view property_name(std::uint32_t code) noexcept { return find(kProperties, code); }
std::string_view confirmed_service_name(std::uint32_t code) noexcept {
  return find(kConfirmedServices, code);
}
std::string_view unconfirmed_service_name(std::uint32_t code) noexcept {
  return find(kUnconfirmedServices, code);
}
std::string_view error_class_name(std::uint32_t code) noexcept { return find(kErrorClasses, code); }
std::string_view error_code_name(std::uint32_t code) noexcept { return find(kErrorCodes, code); }
std::string_view reject_reason_name(std::uint32_t code) noexcept {
  return find(kRejectReasons, code);
}
std::string_view abort_reason_name(std::uint32_t code) noexcept { return find(kAbortReasons, code); }
std::string_view bvlc_function_name(std::uint32_t code) noexcept {
  return find(kBvlcFunctions, code);
}
std::string_view network_message_name(std::uint32_t code) noexcept {
  return find(kNetworkMessages, code);
}

std::span<const NamedCode> confirmed_services() noexcept { return kConfirmedServices; }
std::span<const NamedCode> unconfirmed_services() noexcept { return kUnconfirmedServices; }

std::string format_named(std::string_view name, std::uint32_t code) {
  if (name.empty()) return fmt::format("unknown ({})", code);
  return fmt::format("{} ({})", name, code);
}

}  // namespace bacsum::tables
