#!/usr/bin/env python3
"""Regenerate the pcap fixtures under tests/fixtures.

APDUs are encoded with bacpypes3, framed by hand (BVLC + NPDU), written with
scapy, and then decoded again with bacpypes3 to produce the reference field
dump (*.reference.json) that the C++ golden tests compare against.

    pip install bacpypes3 scapy
    python3 tools/fixtures/make_fixtures.py
"""

from __future__ import annotations

import json
import struct
import sys
from pathlib import Path

from bacpypes3.apdu import (
    APDU,
    AbortPDU,
    ComplexAckPDU,
    ConfirmedRequestPDU,
    Error,
    ErrorPDU,
    IAmRequest,
    ReadPropertyACK,
    ReadPropertyMultipleACK,
    ReadPropertyMultipleRequest,
    ReadPropertyRequest,
    ReinitializeDeviceRequest,
    RejectPDU,
    SimpleAckPDU,
    SubscribeCOVRequest,
    WhoIsRequest,
    WritePropertyMultipleRequest,
    WritePropertyRequest,
    complex_ack_types,
    confirmed_request_types,
    error_types,
    unconfirmed_request_types,
)
from bacpypes3.basetypes import (
    ErrorClass,
    ErrorCode,
    PropertyReference,
    PropertyValue,
    ReadAccessResult,
    ReadAccessResultElement,
    ReadAccessResultElementChoice,
    ReadAccessSpecification,
    WriteAccessSpecification,
)
from bacpypes3.constructeddata import Any, Sequence
from bacpypes3.npdu import NPDU
from bacpypes3.pdu import PDU
from bacpypes3.primitivedata import (
    Boolean,
    CharacterString,
    Enumerated,
    Integer,
    Null,
    ObjectIdentifier,
    Real,
    TagClass,
    Unsigned,
)
from scapy.layers.inet import IP, UDP
from scapy.layers.l2 import Ether
from scapy.packet import Raw
from scapy.utils import wrpcap

OUT = Path(__file__).resolve().parents[2] / "tests" / "fixtures"
BACNET_PORT = 47808
CLIENT = ("00:1a:2b:3c:4d:5e", "192.168.10.20")
DEVICE = ("00:60:35:01:02:03", "192.168.10.50")
BASE_TS = 1_700_000_000


def _apci_defaults(apdu, invoke_id: int | None) -> None:
    apdu.apduSeg = False
    apdu.apduMor = False
    apdu.apduSA = False
    apdu.apduMaxSegs = 0
    apdu.apduMaxResp = 5
    if invoke_id is not None:
        apdu.apduInvokeID = invoke_id


def encode_apdu(apdu, invoke_id: int | None = None) -> bytes:
    _apci_defaults(apdu, invoke_id)
    encoded = apdu.encode()
    if not isinstance(encoded, PDU) or isinstance(encoded, APDU):
        _apci_defaults(encoded, invoke_id)
        encoded = encoded.encode()
    return bytes(encoded.pduData)


def npdu_header(expecting_reply: bool, dnet: tuple[int, bytes] | None = None,
                snet: tuple[int, bytes] | None = None) -> bytes:
    control = 0
    out = bytearray([0x01, 0])
    if dnet is not None:
        control |= 0x20
        out += struct.pack(">HB", dnet[0], len(dnet[1])) + dnet[1]
    if snet is not None:
        control |= 0x08
        out += struct.pack(">HB", snet[0], len(snet[1])) + snet[1]
    if dnet is not None:
        out.append(0xFF)
    if expecting_reply:
        control |= 0x04
    out[1] = control
    return bytes(out)


def bvlc(npdu: bytes, function: int = 0x0A) -> bytes:
    return struct.pack(">BBH", 0x81, function, 4 + len(npdu)) + npdu


def frame(payload: bytes, to_device: bool, ts: float):
    src, dst = (CLIENT, DEVICE) if to_device else (DEVICE, CLIENT)
    pkt = (Ether(src=src[0], dst=dst[0]) / IP(src=src[1], dst=dst[1])
           / UDP(sport=BACNET_PORT, dport=BACNET_PORT) / Raw(payload))
    pkt.time = ts
    return pkt


# reference decode ----------------------------------------------------------

def _leaf(value):
    if isinstance(value, ObjectIdentifier):
        return {"kind": "objectid", "type": int(value[0]), "instance": int(value[1])}
    if isinstance(value, Null):
        return {"kind": "null"}
    if isinstance(value, Boolean):
        return {"kind": "boolean", "value": bool(value)}
    if isinstance(value, Real):
        return {"kind": "real", "value": float(value)}
    if isinstance(value, Enumerated):
        return {"kind": "enumerated", "value": int(value)}
    if isinstance(value, Unsigned):
        return {"kind": "unsigned", "value": int(value)}
    if isinstance(value, Integer):
        return {"kind": "signed", "value": int(value)}
    if isinstance(value, CharacterString):
        return {"kind": "charstring", "value": str(value)}
    return None


def _any_leaves(value: Any) -> list:
    leaves = []
    for tag in value.tagList:
        if tag.tag_class != TagClass.application:
            continue
        leaves.append(_leaf(tag.app_to_object()))
    return leaves


def _walk(obj, path: str, out: dict) -> None:
    """Collect object ids, property ids and primitive values in encoding order."""
    if obj is None:
        return
    if isinstance(obj, Any):
        out["values"].extend(_any_leaves(obj))
        return
    if isinstance(obj, list):
        for item in obj:
            _walk(item, path, out)
        return
    if isinstance(obj, Sequence):
        for name, _ in obj._elements.items():
            _walk(getattr(obj, name, None), name, out)
        return
    if hasattr(obj, "_choice") or type(obj).__name__.endswith("Choice"):
        for name in getattr(obj, "_elements", {}):
            _walk(getattr(obj, name, None), name, out)
        return
    if isinstance(obj, ObjectIdentifier):
        out["object_refs"].append([int(obj[0]), int(obj[1])])
        return
    if "propertyIdentifier" in path or "propertyReference" in path:
        out["property_ids"].append(int(obj))
        return
    leaf = _leaf(obj)
    if leaf is not None:
        out["values"].append(leaf)


def reference_decode(payload: bytes) -> dict:
    assert payload[0] == 0x81
    length = struct.unpack(">H", payload[2:4])[0]
    assert length == len(payload)
    npdu = NPDU.decode(PDU(payload[4:]))
    info = {
        "npdu": {
            "version": npdu.npduVersion,
            "control": payload[5],
            "dnet": npdu.npduDADR.addrNet if npdu.npduDADR is not None else None,
            "snet": npdu.npduSADR.addrNet if npdu.npduSADR is not None else None,
            "hop_count": getattr(npdu, "npduHopCount", None),
            "expects_reply": bool(npdu.pduExpectingReply),
        },
        "object_refs": [],
        "property_ids": [],
        "values": [],
    }
    apdu = APDU.decode(PDU(bytes(npdu.pduData)))
    names = {0: "Confirmed-REQ", 1: "Unconfirmed-REQ", 2: "Simple-ACK", 3: "Complex-ACK",
             4: "Segment-ACK", 5: "Error", 6: "Reject", 7: "Abort"}
    info["pdu_type"] = names[apdu.apduType]
    info["invoke_id"] = getattr(apdu, "apduInvokeID", None)
    service = getattr(apdu, "apduService", None)
    info["service_choice"] = service
    decoded = None
    if apdu.apduType == 0:
        decoded = confirmed_request_types[service].decode(apdu)
    elif apdu.apduType == 1:
        decoded = unconfirmed_request_types[service].decode(apdu)
    elif apdu.apduType == 3:
        decoded = complex_ack_types[service].decode(apdu)
    elif apdu.apduType == 5:
        decoded = error_types[service].decode(apdu)
    elif apdu.apduType in (6, 7):
        info["values"].append({"kind": "reason", "value": apdu.apduAbortRejectReason})
    if decoded is not None:
        _walk(decoded, "", info)
    return info


# fixtures ------------------------------------------------------------------

def write_multiple_frames() -> list[tuple[bytes, bool]]:
    req = WritePropertyMultipleRequest(listOfWriteAccessSpecs=[WriteAccessSpecification(
        objectIdentifier=ObjectIdentifier("analog-output,28"),
        listOfProperties=[PropertyValue(propertyIdentifier="present-value",
                                        value=Any(Real(100.0)), priority=1)])])
    return [(bvlc(npdu_header(True) + encode_apdu(req, 1)), True)]


def write_denied_frames() -> list[tuple[bytes, bool]]:
    req = WritePropertyRequest(objectIdentifier=ObjectIdentifier("device,126"),
                               propertyIdentifier="object-list", propertyValue=Any(Null(())))
    err = Error(service_choice=15, errorClass=ErrorClass("property"),
                errorCode=ErrorCode("write-access-denied"))
    return [
        (bvlc(npdu_header(True) + encode_apdu(req, 2)), True),
        (bvlc(npdu_header(False) + encode_apdu(err, 2)), False),
    ]


def site_capture() -> list[tuple[bytes, bool]]:
    frames: list[tuple[bytes, bool]] = []

    def add(apdu, to_device: bool, invoke: int | None = None, reply: bool = False,
            function: int = 0x0A, **npdu_kw) -> None:
        frames.append((bvlc(npdu_header(reply, **npdu_kw) + encode_apdu(apdu, invoke), function),
                       to_device))

    add(WhoIsRequest(deviceInstanceRangeLowLimit=100, deviceInstanceRangeHighLimit=200), True,
        function=0x0B)
    add(IAmRequest(iAmDeviceIdentifier=ObjectIdentifier("device,126"), maxAPDULengthAccepted=1476,
                   segmentationSupported="segmented-both", vendorID=260), False, function=0x0B)
    add(ReadPropertyRequest(objectIdentifier=ObjectIdentifier("device,126"),
                            propertyIdentifier="object-name"), True, 10, True)
    ack = ReadPropertyACK(objectIdentifier=ObjectIdentifier("device,126"),
                          propertyIdentifier="object-name",
                          propertyValue=Any(CharacterString("Main Plant Controller")))
    add(ack, False, 10)
    frames.extend(write_multiple_frames())
    simple = SimpleAckPDU(service_choice=16)
    add(simple, False, 1)
    frames.extend(write_denied_frames())
    add(ReadPropertyMultipleRequest(listOfReadAccessSpecs=[ReadAccessSpecification(
        objectIdentifier=ObjectIdentifier("analog-input,3"),
        listOfPropertyReferences=[PropertyReference(propertyIdentifier="present-value"),
                                  PropertyReference(propertyIdentifier="units")])]),
        True, 11, True)
    rpm_ack = ReadPropertyMultipleACK(listOfReadAccessResults=[ReadAccessResult(
        objectIdentifier=ObjectIdentifier("analog-input,3"),
        listOfResults=[
            ReadAccessResultElement(propertyIdentifier="present-value",
                                    readResult=ReadAccessResultElementChoice(
                                        propertyValue=Any(Real(21.5)))),
            ReadAccessResultElement(propertyIdentifier="units",
                                    readResult=ReadAccessResultElementChoice(
                                        propertyValue=Any(Enumerated(62)))),
        ])])
    add(rpm_ack, False, 11)
    add(SubscribeCOVRequest(subscriberProcessIdentifier=7,
                            monitoredObjectIdentifier=ObjectIdentifier("analog-value,5"),
                            issueConfirmedNotifications=False, lifetime=300), True, 12, True)
    simple = SimpleAckPDU(service_choice=5)
    add(simple, False, 12)
    add(WritePropertyRequest(objectIdentifier=ObjectIdentifier("binary-output,4"),
                             propertyIdentifier="present-value",
                             propertyValue=Any(Enumerated(1)), priority=8), True, 13, True,
        dnet=(5, b"\x0a"))
    simple = SimpleAckPDU(service_choice=15)
    add(simple, False, 13, snet=(5, b"\x0a"))
    add(ReadPropertyRequest(objectIdentifier=ObjectIdentifier("analog-value,9"),
                            propertyIdentifier="present-value"), True, 14, True)
    reject = RejectPDU(reason=9)
    add(reject, False, 14)
    add(ReinitializeDeviceRequest(reinitializedStateOfDevice="coldstart", password="secret"),
        True, 15, True)
    err = Error(service_choice=20, errorClass=ErrorClass("security"),
                errorCode=ErrorCode("password-failure"))
    add(err, False, 15)
    abort = AbortPDU(reason=4)
    add(abort, False, 16)
    assert len(frames) == 19, len(frames)
    return frames


def write(name: str, frames: list[tuple[bytes, bool]]) -> None:
    packets = [frame(payload, to_device, BASE_TS + i + 0.25) for i, (payload, to_device)
               in enumerate(frames)]
    wrpcap(str(OUT / f"{name}.pcap"), packets)
    reference = [reference_decode(payload) for payload, _ in frames]
    (OUT / f"{name}.reference.json").write_text(json.dumps(reference, indent=2) + "\n")
    print(f"{name}: {len(frames)} frames")


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    write("write_multiple", write_multiple_frames())
    write("write_denied", write_denied_frames())
    write("site_19", site_capture())
    wrpcap(str(OUT / "empty.pcap"), [])
    return 0


if __name__ == "__main__":
    sys.exit(main())
