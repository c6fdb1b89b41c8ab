public static class xAvgUtil
{
    public static double xAvg(int[] x)
    {
        double sum = 0;
        foreach (int e in x) sum += e;
        return sum / x.Length;
    }
}
