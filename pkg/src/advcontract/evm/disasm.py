from __future__ import annotations

from dataclasses import dataclass

from advcontract.evm.opcodes import op_name, push_width


@dataclass(frozen=True, slots=True)
class Instruction:
    offset: int
    opcode: int
    push_operand: bytes | None = None

    @property
    def name(self) -> str:
        return op_name(self.opcode)

    @property
    def size(self) -> int:
        return 1 + (len(self.push_operand) if self.push_operand is not None else 0)

    @property
    def next_offset(self) -> int:
        return self.offset + self.size

    @property
    def value(self) -> int | None:
        """Integer value pushed by PUSH0..PUSH32, else None."""
        if self.push_operand is not None:
            return int.from_bytes(self.push_operand, "big")
        if self.opcode == 0x5F:
            return 0
        return None

    def __str__(self) -> str:
        if self.push_operand is not None:
            return f"{self.name} 0x{self.push_operand.hex()}"
        return self.name


def parse_bytecode(code: str | bytes | bytearray) -> bytes:
    """Accept raw bytes or hex text with an optional 0x prefix."""
    if isinstance(code, (bytes, bytearray)):
        return bytes(code)
    text = "".join(code.split())
    if text[:2].lower() == "0x":
        text = text[2:]
    if len(text) % 2:
        raise ValueError("hex bytecode has an odd number of digits")
    return bytes.fromhex(text)


def disassemble(code: bytes | str) -> list[Instruction]:
    """Linear sweep disassembly.

    PUSH immediates are never decoded as opcodes. A truncated trailing
    immediate is zero-padded on the right to its declared width.
    """
    code = parse_bytecode(code)
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        width = push_width(op)
        if width:
            operand = code[pc + 1 : pc + 1 + width]
            if len(operand) < width:
                operand = operand + bytes(width - len(operand))
            out.append(Instruction(pc, op, operand))
        else:
            out.append(Instruction(pc, op))
        pc += 1 + width
    return out


def assemble(instrs: list[Instruction]) -> bytes:
    buf = bytearray()
    for ins in instrs:
        buf.append(ins.opcode)
        if ins.push_operand is not None:
            buf += ins.push_operand
    return bytes(buf)
