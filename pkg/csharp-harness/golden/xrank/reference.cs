public static class xRankUtil
{
    public static int xRank(int[,] x) { return x.Rank; }
}
