"""Online Kraft-Chaitin allocation, one request at a time.

Requests arrive as lengths; each gets an aligned interval of exactly that
size, i.e. a codeword of that length, and no codeword is a prefix of
another.  The allocator keeps at most one free interval per size.
"""

from hierkraft import KraftViolation, new_allocator
from hierkraft.verify import first_kraft_overflow

fl = new_allocator()
for e in (3, 1, 4, 2):
    iv = fl.allocate(e)
    print(f"request 2^-{e}: got {iv.bits:<5} free {fl.free_measure:<6} list {[x.bits for x in fl]}")

# the free list above holds 1/16; a request for 1/8 cannot be served
try:
    fl.allocate(3)
except KraftViolation as exc:
    print("request 2^-3:", exc)

labels = [2, 3, 1, 4, 4, 2]
print("labels", labels, "first overflow at index", first_kraft_overflow(labels))
