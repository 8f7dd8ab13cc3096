//! Ordered in-process message queues with a replayable transcript.
//!
//! Wire format of a message: one kind byte, a big-endian `u32` payload
//! length, then the payload. The transcript dump has one line per event,
//! `seq,direction,kind,hex-payload`.

use crate::error::{Error, Result};
use std::collections::VecDeque;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
    /// Events that belong to both parties, such as waiting markers.
    Both,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::AliceToBob => "A>B",
            Direction::BobToAlice => "B>A",
            Direction::Both => "--",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "A>B" => Ok(Direction::AliceToBob),
            "B>A" => Ok(Direction::BobToAlice),
            "--" => Ok(Direction::Both),
            other => Err(Error::protocol(format!("unknown direction '{other}'"))),
        }
    }

    fn queue(self) -> usize {
        match self {
            Direction::AliceToBob => 0,
            Direction::BobToAlice => 1,
            Direction::Both => unreachable!("markers are not queued"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgKind {
    MissingReport = 1,
    Abort = 2,
    Bases = 3,
    SurvivingRounds = 4,
    Permutation = 5,
    HashQuery = 6,
    HashAnswer = 7,
    Syndromes = 8,
    Seeds = 9,
    ChoiceFlip = 10,
    MaskedMessages = 11,
    /// Both parties wait before the basis information is revealed.
    Wait = 0x80,
    /// Free-form note, e.g. a truncation of the string length.
    Note = 0x81,
}

impl MsgKind {
    pub fn from_u8(b: u8) -> Result<Self> {
        use MsgKind::*;
        Ok(match b {
            1 => MissingReport,
            2 => Abort,
            3 => Bases,
            4 => SurvivingRounds,
            5 => Permutation,
            6 => HashQuery,
            7 => HashAnswer,
            8 => Syndromes,
            9 => Seeds,
            10 => ChoiceFlip,
            11 => MaskedMessages,
            0x80 => Wait,
            0x81 => Note,
            other => return Err(Error::protocol(format!("unknown message kind {other}"))),
        })
    }
}

/// One transcript event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub seq: u64,
    pub direction: Direction,
    pub kind: MsgKind,
    pub payload: Vec<u8>,
}

impl Record {
    /// Length-prefixed wire encoding.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Decodes one wire message, returning it and the bytes consumed.
    pub fn from_wire(bytes: &[u8]) -> Result<(MsgKind, Vec<u8>, usize)> {
        if bytes.len() < 5 {
            return Err(Error::protocol("truncated message header"));
        }
        let kind = MsgKind::from_u8(bytes[0])?;
        let len = u32::from_be_bytes(bytes[1..5].try_into().expect("four bytes")) as usize;
        let payload = bytes
            .get(5..5 + len)
            .ok_or_else(|| Error::protocol("truncated message payload"))?
            .to_vec();
        Ok((kind, payload, 5 + len))
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.seq, self.direction.as_str(), self.kind as u8, hex::encode(&self.payload))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Transport {
    queues: [VecDeque<(MsgKind, Vec<u8>)>; 2],
    log: Vec<Record>,
}

impl Transport {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, direction: Direction, kind: MsgKind, payload: Vec<u8>) {
        let seq = self.log.len() as u64;
        self.log.push(Record { seq, direction, kind, payload });
    }

    pub fn send(&mut self, direction: Direction, kind: MsgKind, payload: Vec<u8>) {
        let rec = Record { seq: 0, direction, kind, payload };
        // Round-trip through the wire format so both ends see exactly what
        // a byte stream would carry.
        let (kind, payload, _) = Record::from_wire(&rec.to_wire()).expect("well-formed");
        self.queues[direction.queue()].push_back((kind, payload.clone()));
        self.record(direction, kind, payload);
    }

    /// Next message in `direction`, which must be of kind `expect`.
    pub fn recv(&mut self, direction: Direction, expect: MsgKind) -> Result<Vec<u8>> {
        let (kind, payload) = self.queues[direction.queue()]
            .pop_front()
            .ok_or_else(|| Error::protocol(format!("expected {expect:?}, queue empty")))?;
        if kind != expect {
            return Err(Error::protocol(format!("expected {expect:?}, got {kind:?}")));
        }
        Ok(payload)
    }

    /// Next message in `direction` whatever its kind.
    pub fn recv_any(&mut self, direction: Direction) -> Result<(MsgKind, Vec<u8>)> {
        self.queues[direction.queue()]
            .pop_front()
            .ok_or_else(|| Error::protocol("queue empty"))
    }

    pub fn pending(&self, direction: Direction) -> usize {
        self.queues[direction.queue()].len()
    }

    /// Both parties wait; recorded in order with the messages.
    pub fn wait(&mut self, label: &str) {
        self.record(Direction::Both, MsgKind::Wait, label.as_bytes().to_vec());
    }

    pub fn note(&mut self, text: &str) {
        self.record(Direction::Both, MsgKind::Note, text.as_bytes().to_vec());
    }

    pub fn transcript(&self) -> &[Record] {
        &self.log
    }

    pub fn dump(&self) -> String {
        self.log.iter().map(|r| format!("{r}\n")).collect()
    }

    pub fn parse_dump(text: &str) -> Result<Vec<Record>> {
        text.lines()
            .filter(|l| !l.is_empty())
            .map(|line| {
                let parts: Vec<&str> = line.split(',').collect();
                let [seq, dir, kind, payload] = parts[..] else {
                    return Err(Error::protocol(format!("malformed transcript line '{line}'")));
                };
                Ok(Record {
                    seq: seq.parse().map_err(|_| Error::protocol("bad sequence number"))?,
                    direction: Direction::parse(dir)?,
                    kind: MsgKind::from_u8(kind.parse().map_err(|_| Error::protocol("bad kind"))?)?,
                    payload: hex::decode(payload).map_err(|e| Error::protocol(e.to_string()))?,
                })
            })
            .collect()
    }
}

pub(crate) fn encode_indices(idx: &[usize]) -> Vec<u8> {
    idx.iter().flat_map(|&i| (i as u32).to_be_bytes()).collect()
}

pub(crate) fn decode_indices(bytes: &[u8]) -> Result<Vec<usize>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::protocol("index list length is not a multiple of 4"));
    }
    Ok(bytes
        .chunks(4)
        .map(|c| u32::from_be_bytes(c.try_into().expect("four bytes")) as usize)
        .collect())
}

/// Bit string with a `u32` length prefix.
pub(crate) fn encode_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = (bits.len() as u32).to_be_bytes().to_vec();
    out.extend(crate::codes::pack_bits(bits));
    out
}

/// Decodes one prefixed bit string, returning it and the bytes consumed.
pub(crate) fn decode_bits(bytes: &[u8]) -> Result<(Vec<bool>, usize)> {
    if bytes.len() < 4 {
        return Err(Error::protocol("truncated bit string"));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().expect("four bytes")) as usize;
    let used = 4 + len.div_ceil(8);
    if bytes.len() < used {
        return Err(Error::protocol("truncated bit string"));
    }
    Ok((crate::codes::unpack_bits(&bytes[4..used], len), used))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_and_kinds() {
        let mut t = Transport::new();
        t.send(Direction::AliceToBob, MsgKind::Bases, vec![1, 2]);
        t.send(Direction::AliceToBob, MsgKind::Seeds, vec![3]);
        t.send(Direction::BobToAlice, MsgKind::MissingReport, vec![]);
        assert_eq!(t.recv(Direction::AliceToBob, MsgKind::Bases).unwrap(), vec![1, 2]);
        assert!(t.recv(Direction::AliceToBob, MsgKind::Bases).is_err());
        assert_eq!(t.recv(Direction::BobToAlice, MsgKind::MissingReport).unwrap(), Vec::<u8>::new());
        assert!(t.recv(Direction::BobToAlice, MsgKind::Abort).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let mut t = Transport::new();
        t.send(Direction::BobToAlice, MsgKind::MissingReport, vec![0xde, 0xad]);
        t.wait("dt");
        t.send(Direction::AliceToBob, MsgKind::Bases, vec![]);
        let dump = t.dump();
        assert_eq!(dump.lines().next().unwrap(), "0,B>A,1,dead");
        assert_eq!(Transport::parse_dump(&dump).unwrap(), t.transcript());
        assert!(Transport::parse_dump("1,X,1,00").is_err());
    }

    #[test]
    fn wire_format() {
        let r = Record { seq: 0, direction: Direction::AliceToBob, kind: MsgKind::Seeds, payload: vec![7; 3] };
        let wire = r.to_wire();
        assert_eq!(wire, vec![9, 0, 0, 0, 3, 7, 7, 7]);
        let (k, p, used) = Record::from_wire(&wire).unwrap();
        assert_eq!((k, p, used), (MsgKind::Seeds, vec![7; 3], 8));
        assert!(Record::from_wire(&wire[..6]).is_err());
    }

    #[test]
    fn payload_helpers() {
        let idx = vec![0, 5, 70_000];
        assert_eq!(decode_indices(&encode_indices(&idx)).unwrap(), idx);
        let bits = vec![true, false, true, true, false, false, false, false, true];
        let enc = encode_bits(&bits);
        assert_eq!(decode_bits(&enc).unwrap(), (bits, enc.len()));
        assert!(decode_indices(&[1, 2, 3]).is_err());
    }
}
