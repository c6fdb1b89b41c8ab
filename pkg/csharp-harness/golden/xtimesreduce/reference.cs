public static class xTimesReduceUtil
{
    public static int xTimesReduce(int[] x)
    {
        int r = 1;
        foreach (int e in x) r *= e;
        return r;
    }
}
