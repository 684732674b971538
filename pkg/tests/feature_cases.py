"""Curated IR snippets with hand-counted feature tables.

Each case lists only the non-zero features; every other feature is 0.
The counts were worked out by hand from the snippet text, independently of
the extractor.
"""

CASES = {}


def case(name, ir, **nonzero):
    CASES[name] = (ir, nonzero)


case("empty_module", "")

case("declaration_only", "declare i32 @puts(i8*)\n")

case(
    "single_ret",
    "define i32 @f() {\nentry:\n  ret i32 0\n}\n",
    NumRetInst=1, TotalBlocks=1, TotalInsts=1, numConstZeroes=1, TotalFuncs=1,
    const32Bit=1, BBNoPhi=1, BlockLow=1,
)

case(
    "uncond_two_blocks",
    "define void @g() {\nentry:\n  br label %next\nnext:\n  ret void\n}\n",
    oneSuccessor=1, onePred=1, NumEdges=1, BranchCount=1, UncondBranches=1, NumBrInst=1,
    NumRetInst=1, TotalBlocks=2, TotalInsts=2, BlockLow=2, BBNoPhi=2, TotalFuncs=1,
)

case(
    "diamond_phi",
    """define i32 @d(i1 %c) {
entry:
  br i1 %c, label %a, label %b
a:
  br label %m
b:
  br label %m
m:
  %x = phi i32 [ 1, %a ], [ 2, %b ]
  ret i32 %x
}
""",
    twoSuccessor=1, onePred=2, onePredOneSuc=2, oneSuccessor=2, twoPred=1, NumEdges=4,
    BranchCount=3, UncondBranches=2, NumBrInst=3, NumPHIInst=1, BBNumArgsLo=1, BB03Phi=1,
    BeginPhi=1, ArgsPhi=2, BBNoPhi=3, const32Bit=2, numConstOnes=1, NumRetInst=1,
    TotalBlocks=4, TotalInsts=5, BlockLow=4, TotalFuncs=1,
)

case(
    "critical_edge",
    """define void @ce(i1 %c) {
entry:
  br i1 %c, label %a, label %m
a:
  br label %m
m:
  ret void
}
""",
    twoSuccessor=1, onePred=1, onePredOneSuc=1, oneSuccessor=1, twoPred=1, NumEdges=3,
    CriticalCount=1, BranchCount=2, UncondBranches=1, NumBrInst=2, NumRetInst=1,
    TotalBlocks=3, TotalInsts=3, BlockLow=3, BBNoPhi=3, TotalFuncs=1,
)

case(
    "arith_opcodes",
    """define i32 @ar(i32 %a, i32 %b) {
entry:
  %t1 = add i32 %a, 1
  %t2 = sub i32 %t1, %b
  %t3 = mul i32 %t2, 3
  %t4 = shl i32 %t3, 2
  %t5 = ashr i32 %t4, 1
  %t6 = lshr i32 %t5, 0
  %t7 = and i32 %t6, %a
  %t8 = or i32 %t7, 4
  %t9 = xor i32 %t8, -1
  ret i32 %t9
}
""",
    NumAddInst=1, NumSubInst=1, NumMulInst=1, NumShlInst=1, NumAShrInst=1, NumLShrInst=1,
    NumAndInst=1, NumOrInst=1, NumXorInst=1, NumRetInst=1, TotalInsts=10, binaryConstArg=7,
    const32Bit=7, numConstZeroes=1, numConstOnes=2, TotalBlocks=1, BlockLow=1, BBNoPhi=1,
    TotalFuncs=1,
)

case(
    "memory_and_casts",
    """define i64 @mc(i32 %x) {
entry:
  %p = alloca i32, align 4
  store i32 %x, i32* %p, align 4
  %v = load i32, i32* %p, align 4
  %s = sext i32 %v to i64
  %z = zext i32 %v to i64
  %t = trunc i64 %z to i16
  %b = bitcast i32* %p to i8*
  %r = add i64 %s, %z
  ret i64 %r
}
""",
    NumAllocaInst=1, NumStoreInst=1, NumLoadInst=1, NumSExtInst=1, NumZExtInst=1,
    NumTruncInst=1, NumBitCastInst=1, NumAddInst=1, NumRetInst=1, TotalInsts=9,
    TotalMemInst=3, testUnary=6, TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "gep_64bit_indices",
    """define i32 @g2(i32* %a) {
entry:
  %p = getelementptr inbounds i32, i32* %a, i64 1
  %q = getelementptr inbounds [4 x i32], [4 x i32]* null, i64 0, i64 2
  %v = load i32, i32* %p
  ret i32 %v
}
""",
    NumGetElementPtrInst=2, NumLoadInst=1, NumRetInst=1, TotalInsts=4, TotalMemInst=3,
    testUnary=1, const64Bit=3, numConstZeroes=1, numConstOnes=1, TotalBlocks=1,
    BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "calls_and_return_types",
    """declare i32 @h(i32)
declare void @k()
declare i8* @m()

define i32 @c() {
entry:
  %r = call i32 @h(i32 5)
  call void @k()
  %p = call i8* @m()
  ret i32 %r
}
""",
    returnInt=1, NumCallInst=3, const32Bit=1, NumRetInst=1, TotalInsts=4, TotalBlocks=1,
    BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "select_icmp",
    """define i32 @sel(i32 %a) {
entry:
  %c = icmp slt i32 %a, 0
  %r = select i1 %c, i32 %a, i32 1
  ret i32 %r
}
""",
    NumICmpInst=1, NumSelectInst=1, NumRetInst=1, TotalInsts=3, const32Bit=2,
    numConstZeroes=1, numConstOnes=1, TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "counted_loop",
    """define i32 @loop(i32 %n) {
entry:
  br label %h
h:
  %i = phi i32 [ 0, %entry ], [ %i2, %b ]
  %s = phi i32 [ 0, %entry ], [ %s2, %b ]
  %c = icmp slt i32 %i, %n
  br i1 %c, label %b, label %e
b:
  %s2 = add i32 %s, %i
  %i2 = add i32 %i, 1
  br label %h
e:
  ret i32 %s
}
""",
    oneSuccessor=2, twoPred=1, twoSuccessor=1, twoEach=1, onePred=2, onePredOneSuc=1,
    NumEdges=4, BBNumArgsLo=1, BB03Phi=1, BeginPhi=2, ArgsPhi=4, NumPHIInst=2, BBNoPhi=3,
    BranchCount=3, UncondBranches=2, NumBrInst=3, NumICmpInst=1, NumAddInst=2, NumRetInst=1,
    TotalInsts=9, const32Bit=3, numConstZeroes=2, numConstOnes=1, binaryConstArg=1,
    TotalBlocks=4, BlockLow=4, TotalFuncs=1,
)

case(
    "switch_three_way",
    """define void @sw(i32 %x) {
entry:
  switch i32 %x, label %d [
    i32 0, label %a
    i32 1, label %b
  ]
a:
  br label %d
b:
  br label %d
d:
  ret void
}
""",
    const32Bit=2, numConstZeroes=1, numConstOnes=1, onePred=2, onePredOneSuc=2,
    oneSuccessor=2, morePreds=1, NumEdges=5, CriticalCount=1, BranchCount=2, UncondBranches=2,
    NumBrInst=2, NumRetInst=1, TotalInsts=4, TotalBlocks=4, BlockLow=4, BBNoPhi=4, TotalFuncs=1,
)

case(
    "block_mid_size",
    "define i32 @big(i32 %a) {\nentry:\n  %t1 = add i32 %a, %a\n"
    + "".join(f"  %t{i} = add i32 %t{i - 1}, %a\n" for i in range(2, 15))
    + "  ret i32 %t14\n}\n",
    NumAddInst=14, NumRetInst=1, TotalInsts=15, BlockMid=1, BBNoPhi=1, TotalBlocks=1,
    TotalFuncs=1,
)

case(
    "many_phis",
    """define i32 @hp(i1 %c) {
entry:
  br i1 %c, label %a, label %m
a:
  br label %m
m:
  %p1 = phi i32 [ 0, %entry ], [ 1, %a ]
  %p2 = phi i32 [ 0, %entry ], [ 1, %a ]
  %p3 = phi i32 [ 0, %entry ], [ 1, %a ]
  %p4 = phi i32 [ 0, %entry ], [ 1, %a ]
  ret i32 %p4
}
""",
    twoSuccessor=1, onePred=1, onePredOneSuc=1, oneSuccessor=1, twoPred=1, NumEdges=3,
    CriticalCount=1, BBNumArgsHi=1, BBHiPhi=1, BeginPhi=4, ArgsPhi=8, NumPHIInst=4, BBNoPhi=2,
    const32Bit=8, numConstZeroes=4, numConstOnes=4, BranchCount=2, UncondBranches=1,
    NumBrInst=2, NumRetInst=1, TotalInsts=7, TotalBlocks=3, BlockLow=3, TotalFuncs=1,
)

case(
    "unary_family",
    """define float @un(float %f, { i32, i32 } %s, i32 %x) {
entry:
  %n = fneg float %f
  %e = extractvalue { i32, i32 } %s, 0
  %z = freeze i32 %x
  %c = sitofp i32 %e to float
  %r = fadd float %n, %c
  ret float %r
}
""",
    testUnary=4, NumRetInst=1, TotalInsts=6, TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "two_functions",
    """declare void @ext()

define void @a() {
entry:
  ret void
}

define void @b() {
entry:
  call void @ext()
  ret void
}
""",
    TotalFuncs=2, TotalBlocks=2, TotalInsts=3, NumRetInst=2, NumCallInst=1, BlockLow=2, BBNoPhi=2,
)

case(
    "implicit_numbering",
    """define i32 @u(i32 %0) {
  %2 = icmp eq i32 %0, 0
  br i1 %2, label %3, label %4

3:
  ret i32 1

4:
  ret i32 %0
}
""",
    twoSuccessor=1, onePred=2, NumEdges=2, NumICmpInst=1, BranchCount=1, NumBrInst=1,
    NumRetInst=2, const32Bit=2, numConstZeroes=1, numConstOnes=1, TotalInsts=4, TotalBlocks=3,
    BlockLow=3, BBNoPhi=3, TotalFuncs=1,
)

case(
    "stores_of_constants",
    """define void @st(i64* %p, i8* %q) {
entry:
  store i64 0, i64* %p
  store i64 1, i64* %p
  store i8 1, i8* %q
  store i64 7, i64* %p
  ret void
}
""",
    NumStoreInst=4, NumRetInst=1, TotalInsts=5, TotalMemInst=4, const64Bit=3, numConstZeroes=1,
    numConstOnes=2, TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "cond_branch_same_target",
    """define void @same(i1 %c) {
entry:
  br i1 %c, label %m, label %m
m:
  ret void
}
""",
    oneSuccessor=1, onePred=1, NumEdges=1, BranchCount=1, NumBrInst=1, NumRetInst=1,
    TotalInsts=2, TotalBlocks=2, BlockLow=2, BBNoPhi=2, TotalFuncs=1,
)

case(
    "comments_metadata_attributes",
    """; a leading comment
define dso_local i32 @md(i32 noundef %a) #0 !dbg !5 {
entry:
  %r = add nsw i32 %a, 1, !dbg !7 ; trailing comment
  ret i32 %r, !dbg !8
}

attributes #0 = { noinline nounwind }
!5 = !{}
!7 = !{}
!8 = !{}
""",
    NumAddInst=1, NumRetInst=1, TotalInsts=2, binaryConstArg=1, const32Bit=1, numConstOnes=1,
    TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "int_returning_calls",
    """declare i1 @p(i64)
declare i64 @q()

define i1 @ri() {
entry:
  %a = call i64 @q()
  %b = call i1 @p(i64 0)
  ret i1 %b
}
""",
    returnInt=2, NumCallInst=2, NumRetInst=1, TotalInsts=3, const64Bit=1, numConstZeroes=1,
    TotalBlocks=1, BlockLow=1, BBNoPhi=1, TotalFuncs=1,
)

case(
    "unknown_opcode_kept",
    """define i32 @ud(i32 %a, i32 %b) {
entry:
  %q = sdiv i32 %a, %b
  %w = urem i32 %q, 7
  fence seq_cst
  ret i32 %w
}
""",
    binaryConstArg=1, const32Bit=1, NumRetInst=1, TotalInsts=4, TotalBlocks=1, BlockLow=1,
    BBNoPhi=1, TotalFuncs=1,
)
