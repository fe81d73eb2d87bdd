"""Hierarchical prefix codes and the oracle machine that reads them.

Each binary string x asks for space of size 2^-K(x) inside the space of
x minus its last bit, so the codewords of longer strings extend those of
their prefixes.  Decoding replays the allocation and reads an oracle bit
only when some codeword of the next output bit properly extends what has
been read; it never reads past a codeword.  The oracle use after n output
bits is then at most K of the first n bits of the target.
"""

from hierkraft import build_codebook, check_use_bound, decode, encode, load_length_function, tabulate

K = load_length_function(tabulate(lambda x: 2 * len(x), 4), 4)
print("K(x) = 2|x| up to length 4, Kraft sum", K.kraft_sum)
cb = build_codebook(K)

for alpha in ("1", "10", "101", "1011", "0000"):
    beta, chain = encode(cb, alpha)
    res = decode(cb, beta)
    print(f"alpha {alpha:<5} oracle {beta:<9} chain {[c.bits for c in chain]}")
    print(f"      decodes to {res.out:<5} use {res.use_profile}")
    print("     ", check_use_bound(K, alpha, res.use_profile).lines()[-1])

res = decode(cb, "0110")
print("\ntrace of the oracle 0110:")
for step in res.trace:
    if step[0] == "read":
        print(f"  seq {step[1]:>3}: read bit {len(step[2]) + 1} (codeword {step[3]} extends {step[2] or '-'})")
    else:
        print(f"  seq {step[1]:>3}: output {step[2]} (read so far {step[3]})")
